#pragma once

// Exponential-family / link pairs for GLMs written in natural-parameter form
//
//   f(y; theta) = exp{ theta * y - b(theta) },   mu = b'(theta),  var = b''(theta),
//   g(mu) = eta,   theta = h(eta) = (b')^{-1}(g^{-1}(eta)).
//
// Every pair codes h, h' and h'' analytically. Canonical pairs return the
// exact constants h = eta, h' = 1, h'' = 0 so the indefinite Hessian part
// vanishes identically downstream.

#include <string>
#include <string_view>

namespace glmebic {

enum class FamilyKind { Bernoulli, Poisson, Gamma };

class Family {
 public:
  static Family bernoulli() { return Family(FamilyKind::Bernoulli, 1.0); }
  static Family poisson() { return Family(FamilyKind::Poisson, 1.0); }
  /// Gamma with fixed shape (shape 1 is the exponential distribution). The
  /// log-likelihood is scaled by `shape`; b is always the unit-dispersion cumulant.
  static Family gamma(double shape = 1.0);
  /// Accepts "bernoulli" / "binomial" / "binary", "poisson", "gamma".
  static Family parse(std::string_view name);

  FamilyKind kind() const noexcept { return kind_; }
  double shape() const noexcept { return shape_; }
  std::string name() const;

  double b(double theta) const;
  double b_prime(double theta) const;
  double b_double_prime(double theta) const;
  /// (b')^{-1}
  double theta_from_mean(double mu) const;
  bool valid_theta(double theta) const noexcept;
  bool valid_mean(double mu) const noexcept;
  bool valid_response(double y) const noexcept;

 private:
  Family(FamilyKind kind, double shape) : kind_(kind), shape_(shape) {}
  FamilyKind kind_;
  double shape_;
};

enum class LinkKind { Logit, Probit, Cauchit, Cloglog, Log, Identity, Arcsin, Power, InversePower };

class Link {
 public:
  static Link logit() { return Link(LinkKind::Logit, 0.0); }
  static Link probit() { return Link(LinkKind::Probit, 0.0); }
  static Link cauchit() { return Link(LinkKind::Cauchit, 0.0); }
  static Link cloglog() { return Link(LinkKind::Cloglog, 0.0); }
  static Link log() { return Link(LinkKind::Log, 0.0); }
  static Link identity() { return Link(LinkKind::Identity, 0.0); }
  static Link arcsin() { return Link(LinkKind::Arcsin, 0.0); }
  /// eta = mu^lambda, lambda != 0.
  static Link power(double lambda);
  /// eta = mu^(-k), k > 0.
  static Link inverse_power(double k);
  /// Lowercase names: logit, probit, cauchit, cloglog, log, identity, arcsin,
  /// power:k, invpower:k.
  static Link parse(std::string_view name);

  LinkKind kind() const noexcept { return kind_; }
  double exponent() const noexcept { return exponent_; }
  std::string name() const;

  double g(double mu) const;
  double g_inverse(double eta) const;
  /// Exponent lambda of eta = mu^lambda for Power/InversePower/Identity.
  double power_exponent() const noexcept;

 private:
  Link(LinkKind kind, double exponent) : kind_(kind), exponent_(exponent) {}
  LinkKind kind_;
  double exponent_;
};

/// Per-observation quantities needed by the likelihood, score and Hessian:
/// loglik = y h(eta) - b(h(eta)), score_weight = (y - mu) h'(eta),
/// w1 = b''(h) h'^2 and w0 = (y - mu) h''(eta), all already scaled by the
/// family dispersion factor. loglik is -inf when eta is inadmissible.
struct RowTerms {
  double loglik;
  double score_weight;
  double w1;
  double w0;
};

struct PointDerivatives {
  double h;
  double h_prime;
  double h_double_prime;
  double mean;
  double variance;
};

class LinkFamily {
 public:
  const Family& family() const noexcept { return family_; }
  const Link& link() const noexcept { return link_; }
  std::string name() const;
  bool is_canonical() const noexcept;

  bool admissible(double eta) const noexcept;

  double h(double eta) const;
  double h_prime(double eta) const;
  double h_double_prime(double eta) const;
  PointDerivatives derivatives(double eta) const;

  /// Mean via the link route g^{-1}(eta). Throws DomainError off the admissible range.
  double mean(double eta) const;
  /// Mean via the natural-parameter route b'(h(eta)).
  double mean_via_theta(double eta) const;

  RowTerms row_terms(double eta, double y) const noexcept;
  double loglik_term(double eta, double y) const noexcept;

  /// Starting linear predictor for an intercept-only model: g(clamped mean).
  double initial_eta(double mean_response) const;

 private:
  friend LinkFamily compose_link_family(const Family& family, const Link& link);

  enum class Pair {
    BernoulliLogit,
    BernoulliProbit,
    BernoulliCauchit,
    BernoulliCloglog,
    BernoulliIdentity,
    BernoulliArcsin,
    PoissonLog,
    PoissonPower,
    GammaLog,
    GammaPower,
  };

  LinkFamily(Family family, Link link, Pair pair);

  Family family_;
  Link link_;
  Pair pair_;
  double lambda_ = 1.0;  // power exponent for the *Power pairs
};

/// Throws UnsupportedPair when no analytic h is coded for the combination.
LinkFamily compose_link_family(const Family& family, const Link& link);

/// Convenience: parse both names and compose.
LinkFamily make_link_family(std::string_view family, std::string_view link);

}  // namespace glmebic
