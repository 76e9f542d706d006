#include "qforma/report.hpp"

#include <json.hpp>

namespace qforma {

namespace {

using json = nlohmann::ordered_json;

json breakdown_json(const BoundBreakdown& b) {
  json terms = json::object();
  for (const auto& [name, value] : b.terms) terms[name] = value;
  return json{{"method", b.method},
              {"terms", std::move(terms)},
              {"structural_total", b.structural_total},
              {"cq", b.cq},
              {"log_scale", b.log_scale}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string to_json(const BoundBreakdown& b) { return dump(breakdown_json(b)); }

std::string to_json(const Corollary1Bound& b) {
  return dump(json{{"raw", breakdown_json(b.raw)},
                   {"tracked", breakdown_json(b.tracked)}});
}

std::string to_json(const CompareReport& rep) {
  return dump(json{{"theorem1", breakdown_json(rep.theorem1)},
                   {"bai_silverstein", breakdown_json(rep.bai_silverstein)},
                   {"ratio", rep.ratio}});
}

std::string to_json(const EmpiricalMoment& m) {
  return dump(json{{"estimate", m.estimate},
                   {"std_error", m.std_error},
                   {"n_samples", m.n_samples},
                   {"seed", m.seed},
                   {"q", m.q}});
}

std::string to_json(const MarkovCheck& chk) {
  return dump(json{{"tail_fraction", chk.tail_fraction},
                   {"moment_over_rq", chk.moment_over_rq},
                   {"holds", chk.holds}});
}

std::string to_json(const TestOutcome& outcome) {
  return dump(json{{"l_n", outcome.l_n},
                   {"l_star", outcome.l_star},
                   {"critical_value", outcome.critical_value},
                   {"alpha", outcome.alpha},
                   {"reject", outcome.reject},
                   {"method", outcome.method}});
}

}  // namespace qforma
