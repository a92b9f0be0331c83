#include "markerlab/thermo.hpp"

#include <sstream>
#include <stdexcept>

namespace markerlab {

namespace mp = boost::multiprecision;

namespace {

const LogReal& ln2() {
  static const LogReal v = mp::log(LogReal(2));
  return v;
}

constexpr std::uint64_t kMaxExponent = std::uint64_t{1} << 30;

LogReal pow2_real(std::uint64_t e) {
  if (e >= kMaxExponent) throw std::overflow_error("binary exponent " + std::to_string(e) + " out of range");
  return mp::ldexp(LogReal(1), static_cast<int>(e));
}

std::uint64_t pow3(int k) {
  if (k < 0 || k > 30) throw std::overflow_error("3^k out of range");
  std::uint64_t p = 1;
  for (int i = 0; i < k; ++i) p *= 3;
  return p;
}

}  // namespace

std::string format(const LogReal& x, int digits) { return x.str(digits); }

LogReal log2_of(const LogReal& x) {
  if (x <= 0) throw std::domain_error("log2 of a non-positive number");
  return mp::log(x) / ln2();
}

LogReal log2_pow2_plus(std::uint64_t n, long c) {
  if (n < 300) {
    const LogReal v = mp::ldexp(LogReal(1), static_cast<int>(n)) + c;
    return log2_of(v);
  }
  if (n >= kMaxExponent) throw std::overflow_error("binary exponent out of range");
  // 2^n + c = 2^n (1 + c 2^-n); the second-order term is below 2^-500.
  return LogReal(n) + mp::ldexp(LogReal(c), -static_cast<int>(n)) / ln2();
}

std::uint64_t robinson_scale(int k) { return 2 * pow3(k) + 1; }

CardinalityBound cardinality_bounds(int k, SeedMode mode, double cap_constant) {
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  const std::uint64_t n = robinson_scale(k);
  if (2 * n >= kMaxExponent) throw std::overflow_error("scale too large for the log domain");
  CardinalityBound b;
  b.k = k;
  b.mode = mode;
  const LogReal top = pow2_real(4 * pow3(k));  // 16^(3^k)
  b.log2_C = {mp::ldexp(LogReal(1), -2 * k), LogReal(1)};
  b.log2_QH = {top * b.log2_C.lo, top};
  b.pair_delta = mode == SeedMode::Pair ? log2_pow2_plus(static_cast<std::uint64_t>(k) + 1, -1) : LogReal(0);
  b.log2_QB = {b.log2_QH.lo * 3 / 4 + b.pair_delta, b.log2_QH.hi * 3 / 4 + b.pair_delta};
  b.log2_area = 2 * log2_pow2_plus(n, -1);
  if (cap_constant <= 1) throw std::invalid_argument("cap constant must exceed 1");
  b.log2_QB_cap = pow2_real(2 * pow3(k)) * log2_of(LogReal(cap_constant));
  return b;
}

bool entropy_inequality(const LogReal& lhs, const LogReal& rhs, const LogReal& kappa) {
  return lhs >= (1 - kappa) * rhs;
}

EntropyCheck entropy_criterion(int k, const OdometerSchedule& t, double c) {
  EntropyCheck e;
  e.k = k;
  e.kappa = LogReal(c) / t(k);
  const auto small = cardinality_bounds(k, SeedMode::Single);
  const auto big = cardinality_bounds(k + 2, SeedMode::Single);
  // log2 |Q_k| ranges over the Hot interval; areas are exact up to 2^-n terms.
  e.lhs = mp::pow(LogReal(2), log2_of(big.log2_QH.lo) - big.log2_area);
  e.rhs = mp::pow(LogReal(2), log2_of(small.log2_QH.hi) - small.log2_area);
  e.pass = entropy_inequality(e.lhs, e.rhs, e.kappa);
  return e;
}

TemperatureWindow temperature_window(int k, const LogReal& C, const LogReal& Cp, int r) {
  if (C <= 0 || Cp <= 0) throw std::invalid_argument("C and C' must be positive");
  if (r < 1) throw std::invalid_argument("range r must be >= 1");
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  TemperatureWindow w;
  w.k = k;
  w.r = r;
  w.log2_C = log2_of(C);
  w.log2_Cp = log2_of(Cp);
  const std::uint64_t n = robinson_scale(k);
  const std::uint64_t N = robinson_scale(k + 2);
  const LogReal log2_l = log2_pow2_plus(n, -1);
  w.log2_eps = -log2_l / 2;
  const LogReal log2_m = log2_pow2_plus(n + 1, 3);  // 2 (2^n - 1) + 5
  w.structural_lo = -w.log2_eps + 2 * log2_m;
  // |I_N| - |I_{N-2r}| = 4 r (N - r) with N = 2^n' - 1.
  const LogReal log2_N = log2_pow2_plus(N, -1);
  const LogReal log2_boundary = log2_of(LogReal(4 * r)) + log2_pow2_plus(N, -1 - r);
  w.structural_hi = w.log2_eps + 2 * log2_N - log2_boundary;
  w.log2_beta_lo = w.log2_C + w.structural_lo;
  w.log2_beta_hi = w.log2_Cp + w.structural_hi;
  return w;
}

LogInterval displayed_window(int k, const LogReal& C, const LogReal& Cp) {
  const LogReal log2_eps = -log2_pow2_plus(robinson_scale(k), -1) / 2;
  return {log2_of(C) + LogReal(4 * pow3(k)) - log2_eps, log2_of(Cp) + LogReal(2 * pow3(k + 2)) + log2_eps};
}

std::vector<OverlapRow> overlap_check(int kmin, int kmax, const LogReal& C, const LogReal& Cp, int r) {
  std::vector<OverlapRow> rows;
  for (int k = kmin; k <= kmax; ++k) {
    OverlapRow row;
    row.k = k;
    row.log_ratio = temperature_window(k, C, Cp, r).log2_beta_hi - temperature_window(k + 1, C, Cp, r).log2_beta_lo;
    row.overlap = row.log_ratio > 0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<int> overlap_threshold(const std::vector<OverlapRow>& rows) {
  std::optional<int> start;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool rising = i + 1 == rows.size() || rows[i + 1].log_ratio > rows[i].log_ratio;
    if (rows[i].overlap && rising) {
      if (!start) start = rows[i].k;
    } else {
      start.reset();
    }
  }
  return start;
}

std::string thermo_csv(int kmin, int kmax, const LogReal& C, const LogReal& Cp, int r, const OdometerSchedule& t,
                       double kappa_c) {
  std::ostringstream out;
  out << "k,log2_beta_lo,log2_beta_hi,overlap_log_ratio,entropy_pass\n";
  const auto rows = overlap_check(kmin, kmax, C, Cp, r);
  for (const auto& row : rows) {
    const auto w = temperature_window(row.k, C, Cp, r);
    const auto e = entropy_criterion(row.k, t, kappa_c);
    out << row.k << ',' << format(w.log2_beta_lo, 20) << ',' << format(w.log2_beta_hi, 20) << ','
        << format(row.log_ratio, 20) << ',' << (e.pass ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace markerlab
