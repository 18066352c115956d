#pragma once

// Independent reference computations used as test oracles. None of these call
// into the library code they check.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ledgerloop/calendar.hpp"

namespace ledgerloop::oracle {

/// sign(x) * ln(1 + |x|) evaluated with 50 significant decimal digits from the
/// decimal text of x, rounded to double at the end.
double sgn_log_reference(const std::string& decimal);

/// Textbook two-pass population mean and standard deviation.
std::pair<double, double> two_pass(const std::vector<double>& values);

struct Quartiles {
    double min, q25, q50, q75, max;
};
/// Full sort, then linear interpolation at q * (n - 1).
Quartiles sort_quartiles(std::vector<double> values);

/// Charge dates of a monthly schedule with first charge `first`, stepping
/// `every` months on `day_of_month` (clamped to short months), up to `through`.
std::vector<Date> billing_dates(Date first, int day_of_month, int every, Date through);

/// Future-illiquidity label by direct date arithmetic: window [start, end_exclusive).
bool illiquid_label(std::optional<Date> illiquid, Date end_exclusive, std::optional<int> horizon);

/// Normal-approximation binomial 95% check: |k/n - p| <= 1.96 sqrt(p(1-p)/n).
bool within_binomial_95(std::size_t k, std::size_t n, double p);

}  // namespace ledgerloop::oracle
