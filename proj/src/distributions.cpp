#include "qopt/distributions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace qopt {
namespace {

constexpr double kSpecTol = 1e-9;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

Family family_from_name(std::string_view name) {
  const std::string n = lower(name);
  if (n == "exponential" || n == "exp" || n == "m") return Family::Exponential;
  if (n == "hyperexp2" || n == "h2") return Family::HyperExp2;
  if (n == "erlang" || n == "e") return Family::Erlang;
  if (n == "lognormal" || n == "ln") return Family::Lognormal;
  if (n == "deterministic" || n == "d") return Family::Deterministic;
  throw std::invalid_argument("unknown variate family: " + std::string(name));
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Exponential: return "exponential";
    case Family::HyperExp2: return "hyperexp2";
    case Family::Erlang: return "erlang";
    case Family::Lognormal: return "lognormal";
    case Family::Deterministic: return "deterministic";
  }
  return "?";
}

UnitVariateSpec make_spec(Family family, double scv, int phases) {
  UnitVariateSpec spec;
  spec.family = family;
  spec.scv = scv;
  switch (family) {
    case Family::Exponential:
      if (std::abs(scv - 1.0) > kSpecTol)
        throw std::invalid_argument("exponential has scv 1, got " + std::to_string(scv));
      spec.scv = 1.0;
      break;
    case Family::HyperExp2: {
      if (scv <= 1.0)
        throw std::invalid_argument("hyperexp2 requires scv > 1, got " + std::to_string(scv));
      // Balanced-means two-moment fit: mixing probability p1, branch rates
      // 2*p1 and 2*(1-p1). Gives mean 1 and the requested scv.
      const double p1 = 0.5 * (1.0 + std::sqrt((scv - 1.0) / (scv + 1.0)));
      spec.h2_p1 = p1;
      spec.h2_rate_fast = 2.0 * p1;
      spec.h2_rate_slow = 2.0 * (1.0 - p1);
      break;
    }
    case Family::Erlang: {
      if (phases <= 0) {
        if (scv <= 0.0)
          throw std::invalid_argument("erlang needs phases or scv = 1/phases");
        const double n = 1.0 / scv;
        phases = static_cast<int>(std::lround(n));
        if (phases < 1 || std::abs(n - phases) > 1e-6)
          throw std::invalid_argument("erlang scv must equal 1/phases, got " + std::to_string(scv));
      }
      if (scv > 0.0 && std::abs(scv - 1.0 / phases) > kSpecTol)
        throw std::invalid_argument("erlang scv inconsistent with phase count");
      spec.phases = phases;
      spec.scv = 1.0 / phases;
      break;
    }
    case Family::Lognormal: {
      if (scv <= 0.0)
        throw std::invalid_argument("lognormal requires scv > 0, got " + std::to_string(scv));
      // Unique mean-1 lognormal with the given scv.
      const double sigma2 = std::log1p(scv);
      spec.ln_sigma = std::sqrt(sigma2);
      spec.ln_location = -0.5 * sigma2;
      break;
    }
    case Family::Deterministic:
      if (scv != 0.0)
        throw std::invalid_argument("deterministic variates have scv 0");
      break;
  }
  if (spec.scv < 0.0) throw std::invalid_argument("scv must be positive");
  return spec;
}

UnitVariateSpec make_erlang(int phases) {
  if (phases < 1) throw std::invalid_argument("erlang phase count must be >= 1");
  return make_spec(Family::Erlang, 1.0 / phases, phases);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t x = seed;
  (void)splitmix64(x);
  x ^= stream_id * 0xda942042e4dd58b5ULL;
  for (auto& s : state_) s = splitmix64(x);
}

std::uint64_t RandomStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RandomStream::uniform01() {
  // 53 mantissa bits, offset by half an ulp so 0 and 1 are excluded.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

RandomStream make_stream(std::uint64_t seed, std::uint64_t replication,
                         StreamPurpose purpose) {
  return RandomStream(seed, replication * 8 + static_cast<std::uint64_t>(purpose));
}

namespace {

double draw_exponential(RandomStream& stream) { return -std::log(stream.uniform01()); }

}  // namespace

double draw(const UnitVariateSpec& spec, RandomStream& stream) {
  switch (spec.family) {
    case Family::Exponential:
      return draw_exponential(stream);
    case Family::HyperExp2: {
      const double coin = stream.uniform01();
      const double rate = coin < spec.h2_p1 ? spec.h2_rate_fast : spec.h2_rate_slow;
      return draw_exponential(stream) / rate;
    }
    case Family::Erlang: {
      double sum = 0.0;
      for (int i = 0; i < spec.phases; ++i) sum += draw_exponential(stream);
      return sum / spec.phases;
    }
    case Family::Lognormal:
      return std::exp(spec.ln_location + spec.ln_sigma * inverse_normal_cdf(stream.uniform01()));
    case Family::Deterministic:
      return 1.0;
  }
  throw std::logic_error("unreachable variate family");
}

double inverse_normal_cdf(double u) {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("inverse_normal_cdf needs u in (0,1)");

  // Acklam's rational approximation, then one Halley step against erfc.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;

  double x;
  if (u < plow) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - plow) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  static const double sqrt2pi = std::sqrt(2.0 * M_PI);
  const double e = 0.5 * std::erfc(-x / M_SQRT2) - u;
  const double g = e * sqrt2pi * std::exp(0.5 * x * x);
  return x - g / (1.0 + 0.5 * x * g);
}

}  // namespace qopt
