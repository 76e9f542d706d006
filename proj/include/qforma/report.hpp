#pragma once

#include <string>

#include "qforma/bounds.hpp"
#include "qforma/hyptest.hpp"
#include "qforma/montecarlo.hpp"

namespace qforma {

// JSON serialization with stable key order so identical inputs produce
// byte-identical reports.

// {"method": ..., "terms": {name: value, ...}, "structural_total": ...,
//  "cq": ..., "log_scale": ...}
std::string to_json(const BoundBreakdown& b);

// {"raw": <breakdown>, "tracked": <breakdown>}
std::string to_json(const Corollary1Bound& b);

// {"theorem1": <breakdown>, "bai_silverstein": <breakdown>, "ratio": ...}
std::string to_json(const CompareReport& rep);

// {"estimate": ..., "std_error": ..., "n_samples": ..., "seed": ..., "q": ...}
std::string to_json(const EmpiricalMoment& m);

// {"tail_fraction": ..., "moment_over_rq": ..., "holds": ...}
std::string to_json(const MarkovCheck& chk);

// {"l_n": ..., "l_star": ..., "critical_value": ..., "alpha": ...,
//  "reject": ..., "method": ...}
std::string to_json(const TestOutcome& outcome);

}  // namespace qforma
