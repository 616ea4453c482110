#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "hvrt/capability.hpp"
#include "hvrt/engine.hpp"

namespace hvrt {

/// Canonical numeric formatting for every CSV artifact: 12 significant
/// digits, locale-independent, deterministic.
std::string format_number(double v);

void write_timeseries_csv(const TimeSeries& ts, std::ostream& os);

void write_capability_csv(const std::vector<CapabilityRow>& rows, std::ostream& os);

void write_metrics_csv(const std::vector<RunMetrics>& metrics, std::ostream& os);

}  // namespace hvrt
