#include "uaml/service.hpp"

#include "uaml/scenario.hpp"

namespace uaml::service {

Json infer_document(const NetworkSpec& net, const EvidenceSet& ev, bool attribution,
                    Precision precision) {
  const InferenceResult result = infer_subjective(net, ev);
  if (!attribution) return result_to_json(result, nullptr, precision);
  const auto attr = attribute_all(net, ev);
  return result_to_json(result, &attr, precision);
}

Json error_document(const Error& e) {
  Json err;
  err["code"] = std::string(error_code_name(e.code()));
  err["message"] = e.what();
  if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
    err["line"] = pe->line();
    err["column"] = pe->column();
  }
  Json j;
  j["error"] = std::move(err);
  return j;
}

Session::Session(NetworkSpec net) : net_(std::move(net)) {
  require_valid(validate_network(net_));
  model_body_ = dump_json(network_to_json(net_));
  rows_body_ = dump_json(scenario::rows_to_json(scenario::canonical_rows()));
}

ApiResponse Session::get_model() const { return {200, model_body_}; }

ApiResponse Session::get_scenario_rows() const { return {200, rows_body_}; }

ApiResponse Session::post_infer(std::string_view body) const {
  EvidenceSet ev;
  try {
    ev = evidence_from_json(parse_json(std::string(body), "request"));
    bind_evidence(net_.structure, ev);
  } catch (const Error& e) {
    return {400, dump_json(error_document(e))};
  }
  try {
    return {200, dump_json(infer_document(net_, ev))};
  } catch (const Error& e) {
    Json doc = error_document(e);
    doc["diagnostics"] = Json::array({{{"kind", std::string(error_code_name(e.code()))},
                                       {"detail", e.what()}}});
    return {422, dump_json(doc)};
  }
}

}  // namespace uaml::service
