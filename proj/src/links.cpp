#include "glmebic/links.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "glmebic/error.hpp"

namespace glmebic {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMeanClamp = 1e-12;

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double normal_cdf(double x) {
  return x < 0.0 ? 0.5 * std::erfc(-x * kInvSqrt2)
                 : 1.0 - 0.5 * std::erfc(x * kInvSqrt2);
}

double log_normal_pdf(double x) {
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
}

// log Phi(x), accurate in both tails.
double log_normal_cdf(double x) {
  if (x < -30.0) {
    // Mills-ratio expansion; truncation error below 1e-15 for x < -30.
    const double t = 1.0 / (x * x);
    const double series = 1.0 - t * (1.0 - t * (3.0 - t * (15.0 - t * (105.0 - t * 945.0))));
    return log_normal_pdf(x) - std::log(-x) + std::log(series);
  }
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  return std::log(0.5 * std::erfc(-x * kInvSqrt2));
}

// Binary-response pieces for mean G(eta) = g^{-1}(eta):
//   a = G'/G, c = G'/(1-G), kappa = G''/G'.
// Then h' = a + c and h'' = (a + c)(kappa + c - a).
struct BinaryParts {
  double mean;
  double log_mean;
  double log_one_minus_mean;
  double log_density;  // log G'
  double a;
  double c;
  double kappa;
};

BinaryParts probit_parts(double eta) {
  BinaryParts p;
  p.mean = normal_cdf(eta);
  p.log_mean = log_normal_cdf(eta);
  p.log_one_minus_mean = log_normal_cdf(-eta);
  p.log_density = log_normal_pdf(eta);
  p.a = std::exp(p.log_density - p.log_mean);
  p.c = std::exp(p.log_density - p.log_one_minus_mean);
  p.kappa = -eta;
  return p;
}

BinaryParts cauchit_parts(double eta) {
  BinaryParts p;
  // P(X > t) = atan2(1, t) / pi is exact in both tails.
  const double upper = std::atan2(1.0, eta) / std::numbers::pi;
  const double lower = std::atan2(1.0, -eta) / std::numbers::pi;
  p.mean = lower;
  p.log_mean = std::log(lower);
  p.log_one_minus_mean = std::log(upper);
  p.log_density = -std::log(std::numbers::pi) - std::log1p(eta * eta);
  p.a = std::exp(p.log_density - p.log_mean);
  p.c = std::exp(p.log_density - p.log_one_minus_mean);
  p.kappa = -2.0 * eta / (1.0 + eta * eta);
  return p;
}

BinaryParts cloglog_parts(double eta) {
  BinaryParts p;
  const double e = std::exp(eta);
  p.mean = -std::expm1(-e);
  // log(1 - exp(-e)) ~ eta - e/2 once e is tiny.
  p.log_mean = eta < -30.0 ? eta - 0.5 * e : std::log(p.mean);
  p.log_one_minus_mean = -e;
  p.log_density = eta - e;
  p.a = std::exp(p.log_density - p.log_mean);
  p.c = e;
  p.kappa = 1.0 - e;
  return p;
}

BinaryParts identity_parts(double eta) {
  BinaryParts p;
  p.mean = eta;
  p.log_mean = std::log(eta);
  p.log_one_minus_mean = std::log1p(-eta);
  p.log_density = 0.0;
  p.a = 1.0 / eta;
  p.c = 1.0 / (1.0 - eta);
  p.kappa = 0.0;
  return p;
}

BinaryParts arcsin_parts(double eta) {
  BinaryParts p;
  const double s = std::sin(eta);
  const double co = std::cos(eta);
  p.mean = s * s;
  p.log_mean = 2.0 * std::log(s);
  p.log_one_minus_mean = 2.0 * std::log(co);
  p.log_density = std::log(2.0 * s * co);
  p.a = 2.0 * co / s;
  p.c = 2.0 * s / co;
  p.kappa = 2.0 * std::cos(2.0 * eta) / std::sin(2.0 * eta);
  return p;
}

RowTerms binary_row(const BinaryParts& p, double y) {
  RowTerms t;
  t.loglik = y * p.log_mean + (1.0 - y) * p.log_one_minus_mean;
  if (!std::isfinite(t.loglik)) {
    const double mu = std::clamp(p.mean, kMeanClamp, 1.0 - kMeanClamp);
    t.loglik = y * std::log(mu) + (1.0 - y) * std::log1p(-mu);
  }
  const double hp = p.a + p.c;
  t.score_weight = y * p.a - (1.0 - y) * p.c;
  t.w1 = std::exp(p.log_density) * hp;
  t.w0 = t.score_weight * (p.kappa + p.c - p.a);
  return t;
}

PointDerivatives binary_point(const BinaryParts& p) {
  PointDerivatives d;
  d.h = p.log_mean - p.log_one_minus_mean;
  d.h_prime = p.a + p.c;
  d.h_double_prime = d.h_prime * (p.kappa + p.c - p.a);
  d.mean = p.mean;
  d.variance = p.mean * (1.0 - p.mean);
  return d;
}

bool parse_number(std::string_view text, double& value) {
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

// ---------------------------------------------------------------- Family

Family Family::gamma(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw Error(ErrorCode::InvalidArgs, "gamma shape must be positive");
  }
  return Family(FamilyKind::Gamma, shape);
}

Family Family::parse(std::string_view name) {
  if (name == "bernoulli" || name == "binomial" || name == "binary") return bernoulli();
  if (name == "poisson") return poisson();
  if (name == "gamma") return gamma();
  throw Error(ErrorCode::InvalidArgs, "unknown family '" + std::string(name) + "'");
}

std::string Family::name() const {
  switch (kind_) {
    case FamilyKind::Bernoulli: return "bernoulli";
    case FamilyKind::Poisson: return "poisson";
    case FamilyKind::Gamma: return "gamma";
  }
  return "unknown";
}

double Family::b(double theta) const {
  switch (kind_) {
    case FamilyKind::Bernoulli: return softplus(theta);
    case FamilyKind::Poisson: return std::exp(theta);
    case FamilyKind::Gamma: return theta < 0.0 ? -std::log(-theta) : kNaN;
  }
  return kNaN;
}

double Family::b_prime(double theta) const {
  switch (kind_) {
    case FamilyKind::Bernoulli: return logistic(theta);
    case FamilyKind::Poisson: return std::exp(theta);
    case FamilyKind::Gamma: return theta < 0.0 ? -1.0 / theta : kNaN;
  }
  return kNaN;
}

double Family::b_double_prime(double theta) const {
  switch (kind_) {
    case FamilyKind::Bernoulli: {
      const double m = logistic(theta);
      return m * (1.0 - m);
    }
    case FamilyKind::Poisson: return std::exp(theta);
    case FamilyKind::Gamma: return theta < 0.0 ? 1.0 / (theta * theta) : kNaN;
  }
  return kNaN;
}

double Family::theta_from_mean(double mu) const {
  if (!valid_mean(mu)) throw Error(ErrorCode::DomainError, "mean outside family domain");
  switch (kind_) {
    case FamilyKind::Bernoulli: return std::log(mu) - std::log1p(-mu);
    case FamilyKind::Poisson: return std::log(mu);
    case FamilyKind::Gamma: return -1.0 / mu;
  }
  return kNaN;
}

bool Family::valid_theta(double theta) const noexcept {
  if (!std::isfinite(theta)) return false;
  return kind_ != FamilyKind::Gamma || theta < 0.0;
}

bool Family::valid_mean(double mu) const noexcept {
  if (!std::isfinite(mu)) return false;
  if (kind_ == FamilyKind::Bernoulli) return mu > 0.0 && mu < 1.0;
  return mu > 0.0;
}

bool Family::valid_response(double y) const noexcept {
  if (!std::isfinite(y)) return false;
  switch (kind_) {
    case FamilyKind::Bernoulli: return y == 0.0 || y == 1.0;
    case FamilyKind::Poisson: return y >= 0.0 && y == std::floor(y);
    case FamilyKind::Gamma: return y > 0.0;
  }
  return false;
}

// ---------------------------------------------------------------- Link

Link Link::power(double lambda) {
  if (lambda == 0.0 || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgs, "power link exponent must be finite and non-zero");
  }
  return Link(LinkKind::Power, lambda);
}

Link Link::inverse_power(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw Error(ErrorCode::InvalidArgs, "inverse power link exponent must be positive");
  }
  return Link(LinkKind::InversePower, k);
}

Link Link::parse(std::string_view name) {
  if (name == "logit") return logit();
  if (name == "probit") return probit();
  if (name == "cauchit") return cauchit();
  if (name == "cloglog") return cloglog();
  if (name == "log") return log();
  if (name == "identity") return identity();
  if (name == "arcsin") return arcsin();
  const auto colon = name.find(':');
  if (colon != std::string_view::npos) {
    const auto head = name.substr(0, colon);
    double k = 0.0;
    if (parse_number(name.substr(colon + 1), k)) {
      if (head == "power") return power(k);
      if (head == "invpower") return inverse_power(k);
    }
  }
  throw Error(ErrorCode::InvalidArgs, "unknown link '" + std::string(name) + "'");
}

std::string Link::name() const {
  auto num = [](double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  };
  switch (kind_) {
    case LinkKind::Logit: return "logit";
    case LinkKind::Probit: return "probit";
    case LinkKind::Cauchit: return "cauchit";
    case LinkKind::Cloglog: return "cloglog";
    case LinkKind::Log: return "log";
    case LinkKind::Identity: return "identity";
    case LinkKind::Arcsin: return "arcsin";
    case LinkKind::Power: return "power:" + num(exponent_);
    case LinkKind::InversePower: return "invpower:" + num(exponent_);
  }
  return "unknown";
}

double Link::power_exponent() const noexcept {
  switch (kind_) {
    case LinkKind::Identity: return 1.0;
    case LinkKind::Power: return exponent_;
    case LinkKind::InversePower: return -exponent_;
    default: return kNaN;
  }
}

double Link::g(double mu) const {
  switch (kind_) {
    case LinkKind::Logit: return std::log(mu) - std::log1p(-mu);
    case LinkKind::Probit: return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * mu);
    case LinkKind::Cauchit: return std::tan(std::numbers::pi * (mu - 0.5));
    case LinkKind::Cloglog: return std::log(-std::log1p(-mu));
    case LinkKind::Log: return std::log(mu);
    case LinkKind::Identity: return mu;
    case LinkKind::Arcsin: return std::asin(std::sqrt(mu));
    case LinkKind::Power:
    case LinkKind::InversePower: return std::pow(mu, power_exponent());
  }
  return kNaN;
}

double Link::g_inverse(double eta) const {
  switch (kind_) {
    case LinkKind::Logit: return logistic(eta);
    case LinkKind::Probit: return normal_cdf(eta);
    case LinkKind::Cauchit: return std::atan2(1.0, -eta) / std::numbers::pi;
    case LinkKind::Cloglog: return -std::expm1(-std::exp(eta));
    case LinkKind::Log: return std::exp(eta);
    case LinkKind::Identity: return eta;
    case LinkKind::Arcsin: {
      const double s = std::sin(eta);
      return s * s;
    }
    case LinkKind::Power:
    case LinkKind::InversePower: return std::pow(eta, 1.0 / power_exponent());
  }
  return kNaN;
}

// ---------------------------------------------------------------- LinkFamily

LinkFamily::LinkFamily(Family family, Link link, Pair pair)
    : family_(family), link_(link), pair_(pair) {
  if (pair == Pair::PoissonPower || pair == Pair::GammaPower) lambda_ = link.power_exponent();
}

LinkFamily compose_link_family(const Family& family, const Link& link) {
  using P = LinkFamily::Pair;
  const LinkKind lk = link.kind();
  switch (family.kind()) {
    case FamilyKind::Bernoulli:
      switch (lk) {
        case LinkKind::Logit: return LinkFamily(family, link, P::BernoulliLogit);
        case LinkKind::Probit: return LinkFamily(family, link, P::BernoulliProbit);
        case LinkKind::Cauchit: return LinkFamily(family, link, P::BernoulliCauchit);
        case LinkKind::Cloglog: return LinkFamily(family, link, P::BernoulliCloglog);
        case LinkKind::Identity: return LinkFamily(family, link, P::BernoulliIdentity);
        case LinkKind::Arcsin: return LinkFamily(family, link, P::BernoulliArcsin);
        default: break;
      }
      break;
    case FamilyKind::Poisson:
      if (lk == LinkKind::Log) return LinkFamily(family, link, P::PoissonLog);
      if (lk == LinkKind::Identity || lk == LinkKind::Power || lk == LinkKind::InversePower) {
        return LinkFamily(family, link, P::PoissonPower);
      }
      break;
    case FamilyKind::Gamma:
      if (lk == LinkKind::Log) return LinkFamily(family, link, P::GammaLog);
      if (lk == LinkKind::Identity || lk == LinkKind::Power || lk == LinkKind::InversePower) {
        return LinkFamily(family, link, P::GammaPower);
      }
      break;
  }
  throw Error(ErrorCode::UnsupportedPair,
              "no analytic h for family '" + family.name() + "' with link '" + link.name() + "'");
}

LinkFamily make_link_family(std::string_view family, std::string_view link) {
  return compose_link_family(Family::parse(family), Link::parse(link));
}

std::string LinkFamily::name() const { return family_.name() + "/" + link_.name(); }

bool LinkFamily::is_canonical() const noexcept {
  return pair_ == Pair::BernoulliLogit || pair_ == Pair::PoissonLog ||
         (pair_ == Pair::GammaPower && lambda_ == -1.0);
}

bool LinkFamily::admissible(double eta) const noexcept {
  if (!std::isfinite(eta)) return false;
  switch (pair_) {
    case Pair::BernoulliIdentity: return eta > 0.0 && eta < 1.0;
    case Pair::BernoulliArcsin: return eta > 0.0 && eta < 0.5 * std::numbers::pi;
    case Pair::PoissonPower:
    case Pair::GammaPower: return eta > 0.0;
    default: return true;
  }
}

PointDerivatives LinkFamily::derivatives(double eta) const {
  if (!admissible(eta)) {
    throw Error(ErrorCode::DomainError,
                "eta=" + std::to_string(eta) + " outside admissible range of " + name());
  }
  PointDerivatives d{};
  switch (pair_) {
    case Pair::BernoulliLogit: {
      d.h = eta;
      d.h_prime = 1.0;
      d.h_double_prime = 0.0;
      d.mean = logistic(eta);
      d.variance = d.mean * (1.0 - d.mean);
      return d;
    }
    case Pair::BernoulliProbit: return binary_point(probit_parts(eta));
    case Pair::BernoulliCauchit: return binary_point(cauchit_parts(eta));
    case Pair::BernoulliCloglog: {
      // h = log(exp(e^eta) - 1) = e^eta + log(1 - exp(-e^eta))
      const BinaryParts p = cloglog_parts(eta);
      d = binary_point(p);
      d.h = std::exp(eta) + p.log_mean;
      return d;
    }
    case Pair::BernoulliIdentity: return binary_point(identity_parts(eta));
    case Pair::BernoulliArcsin: return binary_point(arcsin_parts(eta));
    case Pair::PoissonLog: {
      d.h = eta;
      d.h_prime = 1.0;
      d.h_double_prime = 0.0;
      d.mean = std::exp(eta);
      d.variance = d.mean;
      return d;
    }
    case Pair::PoissonPower: {
      d.h = std::log(eta) / lambda_;
      d.h_prime = 1.0 / (lambda_ * eta);
      d.h_double_prime = -1.0 / (lambda_ * eta * eta);
      d.mean = std::pow(eta, 1.0 / lambda_);
      d.variance = d.mean;
      return d;
    }
    case Pair::GammaLog: {
      const double e = std::exp(-eta);
      d.h = -e;
      d.h_prime = e;
      d.h_double_prime = -e;
      d.mean = std::exp(eta);
      d.variance = d.mean * d.mean;
      return d;
    }
    case Pair::GammaPower: {
      const double inv = 1.0 / lambda_;
      d.mean = std::pow(eta, inv);
      d.h = -1.0 / d.mean;
      d.h_prime = inv * std::pow(eta, -inv - 1.0);
      d.h_double_prime = inv * (-inv - 1.0) * std::pow(eta, -inv - 2.0);
      d.variance = d.mean * d.mean;
      return d;
    }
  }
  return d;
}

double LinkFamily::h(double eta) const { return derivatives(eta).h; }
double LinkFamily::h_prime(double eta) const { return derivatives(eta).h_prime; }
double LinkFamily::h_double_prime(double eta) const { return derivatives(eta).h_double_prime; }

double LinkFamily::mean(double eta) const {
  if (!admissible(eta)) {
    throw Error(ErrorCode::DomainError,
                "eta=" + std::to_string(eta) + " outside admissible range of " + name());
  }
  return link_.g_inverse(eta);
}

double LinkFamily::mean_via_theta(double eta) const { return family_.b_prime(h(eta)); }

RowTerms LinkFamily::row_terms(double eta, double y) const noexcept {
  if (!admissible(eta)) return RowTerms{-kInf, kNaN, kNaN, kNaN};
  switch (pair_) {
    case Pair::BernoulliLogit: {
      const double mu = logistic(eta);
      RowTerms t;
      t.loglik = -(y * softplus(-eta) + (1.0 - y) * softplus(eta));
      t.score_weight = y - mu;
      t.w1 = mu * (1.0 - mu);
      t.w0 = 0.0;
      return t;
    }
    case Pair::BernoulliProbit: return binary_row(probit_parts(eta), y);
    case Pair::BernoulliCauchit: return binary_row(cauchit_parts(eta), y);
    case Pair::BernoulliCloglog: return binary_row(cloglog_parts(eta), y);
    case Pair::BernoulliIdentity: return binary_row(identity_parts(eta), y);
    case Pair::BernoulliArcsin: return binary_row(arcsin_parts(eta), y);
    case Pair::PoissonLog: {
      const double mu = std::exp(eta);
      return RowTerms{y * eta - mu, y - mu, mu, 0.0};
    }
    case Pair::PoissonPower: {
      const double h = std::log(eta) / lambda_;
      const double hp = 1.0 / (lambda_ * eta);
      const double hpp = -hp / eta;
      const double mu = std::pow(eta, 1.0 / lambda_);
      return RowTerms{y * h - mu, (y - mu) * hp, mu * hp * hp, (y - mu) * hpp};
    }
    case Pair::GammaLog: {
      const double nu = family_.shape();
      const double e = std::exp(-eta);
      const double r = nu * (y * e - 1.0);
      return RowTerms{nu * (-y * e - eta), r, nu, -r};
    }
    case Pair::GammaPower: {
      const double nu = family_.shape();
      const double inv = 1.0 / lambda_;
      const double mu = std::pow(eta, inv);
      const double hp = inv / (mu * eta);
      const double hpp = hp * (-inv - 1.0) / eta;
      return RowTerms{nu * (-y / mu - std::log(mu)), nu * (y - mu) * hp, nu * mu * mu * hp * hp,
                      nu * (y - mu) * hpp};
    }
  }
  return RowTerms{-kInf, kNaN, kNaN, kNaN};
}

double LinkFamily::loglik_term(double eta, double y) const noexcept {
  return row_terms(eta, y).loglik;
}

double LinkFamily::initial_eta(double mean_response) const {
  double mu = mean_response;
  if (family_.kind() == FamilyKind::Bernoulli) {
    mu = std::clamp(mu, 1e-4, 1.0 - 1e-4);
  } else {
    mu = std::max(mu, 1e-4);
  }
  return link_.g(mu);
}

}  // namespace glmebic
