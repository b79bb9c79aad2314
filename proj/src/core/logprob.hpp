#pragma once

// Base-2 log-probability arithmetic. Every score in the parser is a log2
// probability; zero probability is -infinity.

#include <cmath>
#include <limits>

namespace pcfgthresh {

using LogProb = double;

inline constexpr LogProb kLogZero = -std::numeric_limits<double>::infinity();
inline constexpr LogProb kLogOne = 0.0;
inline constexpr double kInvLn2 = 1.4426950408889634074;  // 1 / ln 2

inline LogProb to_log(double p) { return p > 0.0 ? std::log2(p) : kLogZero; }
inline double to_linear(LogProb lp) { return std::exp2(lp); }

// log2(2^a + 2^b), computed as max + log1p(2^(min - max)).
inline LogProb log_add(LogProb a, LogProb b) {
  if (a < b) {
    const LogProb t = a;
    a = b;
    b = t;
  }
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp2(b - a)) * kInvLn2;
}

// Threshold ratio in [0,1] as a log2 bound; 0 disables (-inf never prunes).
inline LogProb ratio_to_log(double ratio) { return to_log(ratio); }

}  // namespace pcfgthresh
