#ifndef UAML_SERVICE_HPP_
#define UAML_SERVICE_HPP_

#include <string>
#include <string_view>

#include "uaml/error.hpp"
#include "uaml/inference.hpp"
#include "uaml/json.hpp"
#include "uaml/network.hpp"

namespace uaml::service {

// Inference document for one evidence set: opinions, diagnostics and
// (optionally) uncertainty attribution.  The CLI `infer` command and
// POST /api/infer both produce exactly this.
Json infer_document(const NetworkSpec& net, const EvidenceSet& ev, bool attribution = true,
                    Precision precision = Precision::kDisplay);

Json error_document(const Error& e);

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Request handlers over one loaded network.  Immutable after construction,
// so handlers may run concurrently.
class Session {
 public:
  // Throws Error(kUnsupportedStructure / kMalformedNetwork) if the network
  // fails validation.
  explicit Session(NetworkSpec net);

  const NetworkSpec& network() const { return net_; }

  ApiResponse get_model() const;
  // 400 for unparsable or invalid evidence, 422 when inference fails.
  ApiResponse post_infer(std::string_view body) const;
  ApiResponse get_scenario_rows() const;

 private:
  NetworkSpec net_;
  std::string model_body_;
  std::string rows_body_;
};

}  // namespace uaml::service

#endif  // UAML_SERVICE_HPP_
