// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>

#include "adlm/metrics.hpp"

namespace adlm::report {

/// epsilon,mean_pool_size,stddev,samples,steps
std::string to_csv(const metrics::SweepReport& r);
std::string to_json(const metrics::SweepReport& r);

/// Evaluation table: one row per (variant, metric) with metric in {PPL, Distinct}
/// and one column per BPW cap, "variant,metric,bpw=1,...".
std::string to_csv(const metrics::EvalReport& r);
/// Every field of every row plus format_version.
std::string to_json(const metrics::EvalReport& r);

/// id,label,text with RFC 4180 quoting.
std::string to_csv(std::span<const metrics::LabeledText> corpus);

}  // namespace adlm::report
