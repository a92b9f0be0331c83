#pragma once

// Log-domain bookkeeping of marker cardinalities, the entropy criterion and
// the inverse-temperature windows T_k.

#include "markerlab/measures.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <string>
#include <vector>

namespace markerlab {

/// 100 decimal digits; binary exponents up to about 2^30 are accepted.
using LogReal = boost::multiprecision::cpp_bin_float_100;

std::string format(const LogReal& x, int digits = 30);

/// log2(2^n + c) for 2^n + c > 0.
LogReal log2_pow2_plus(std::uint64_t n, long c);
LogReal log2_of(const LogReal& x);

/// n_k = 2 * 3^k + 1.
std::uint64_t robinson_scale(int k);

struct LogInterval {
  LogReal lo;
  LogReal hi;
};

enum class SeedMode : std::uint8_t { Single, Pair };

struct CardinalityBound {
  int k = 0;
  SeedMode mode = SeedMode::Single;
  LogInterval log2_QH;     // [4^-k 16^(3^k), 16^(3^k)]
  LogInterval log2_QB;     // 3/4 of log2_QH, plus the seed term in pair mode
  LogReal log2_area;       // log2 |I_{l_{n_k}}|
  LogReal pair_delta;      // log2(2^(k+1) - 1) in pair mode, 0 otherwise
  LogReal log2_QB_cap;     // log2(C^(4^(3^k))) for the supplied C; reported only
  LogInterval log2_C;      // [4^-k, 1]: bounds on log2 C_k
};

/// Throws std::overflow_error when an exponent leaves the supported range.
CardinalityBound cardinality_bounds(int k, SeedMode mode, double cap_constant = 2.0);

/// lhs >= (1 - kappa) rhs.
bool entropy_inequality(const LogReal& lhs, const LogReal& rhs, const LogReal& kappa);

struct EntropyCheck {
  int k = 0;
  LogReal kappa;
  LogReal lhs;  // smallest normalised entropy at k + 2
  LogReal rhs;  // largest normalised entropy at k
  bool pass = false;
};

/// Conservative evaluation with kappa_k = c / t_k.
EntropyCheck entropy_criterion(int k, const OdometerSchedule& t, double c = 1.0);

struct TemperatureWindow {
  int k = 0;
  int r = 2;
  LogReal log2_C;
  LogReal log2_Cp;
  LogReal log2_eps;        // -1/2 log2 l_{n_k}
  LogReal structural_lo;   // log2 beta_lo - log2 C
  LogReal structural_hi;   // log2 beta_hi - log2 C'
  LogReal log2_beta_lo;
  LogReal log2_beta_hi;
  bool nonempty() const { return log2_beta_lo < log2_beta_hi; }
};

/// beta_lo = (C / eps_k) |I_m| with m = 2 l_{n_k} + 5,
/// beta_hi = C' eps_k |I_N| / (|I_N| - |I_{N - 2r}|) with N = l_{n_{k+2}},
/// eps_k = l_{n_k}^(-1/2).
TemperatureWindow temperature_window(int k, const LogReal& C = 1, const LogReal& Cp = 1, int r = 2);

/// log2 of C (4^(3^k))^2 / eps_k and C' 4^(3^(k+2)) eps_k.
LogInterval displayed_window(int k, const LogReal& C = 1, const LogReal& Cp = 1);

struct OverlapRow {
  int k = 0;
  LogReal log_ratio;  // log2 beta_hi(k) - log2 beta_lo(k + 1)
  bool overlap = false;
};

std::vector<OverlapRow> overlap_check(int kmin, int kmax, const LogReal& C = 1, const LogReal& Cp = 1, int r = 2);

/// First k from which every later row overlaps and the ratios increase.
std::optional<int> overlap_threshold(const std::vector<OverlapRow>& rows);

/// "k,log2_beta_lo,log2_beta_hi,overlap_log_ratio,entropy_pass".
std::string thermo_csv(int kmin, int kmax, const LogReal& C, const LogReal& Cp, int r, const OdometerSchedule& t,
                       double kappa_c = 1.0);

}  // namespace markerlab
