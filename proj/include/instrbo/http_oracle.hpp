#pragma once

#include "instrbo/oracles.hpp"
#include "instrbo/types.hpp"

#include <string>
#include <vector>

namespace instrbo {

/// Connection settings for a remote oracle endpoint.
///
/// The wire schema is one POST per call:
///   request  {"input": <string>, "role": "generator"|"predictor", "temperature": 0}
///   response {"text": <string>}
/// Shims for chat-completion-style APIs are expected to live behind this
/// schema on the server side.
struct HttpOracleConfig {
    std::string base_url;  // e.g. http://127.0.0.1:8080
    std::string path = "/oracle";
    std::string auth_token;  // optional; sent as a bearer token
    int timeout_ms = 30000;
    int max_attempts = 3;
    int backoff_initial_ms = 100;  // doubles per retry

    void validate() const;
};

/// One oracle call with retry and exponential backoff. Non-2xx responses and
/// transport failures are retried up to max_attempts, then TransportError is
/// thrown carrying the attempt count. attempts_out, when given, receives the
/// number of attempts actually made.
std::string http_oracle_call(const HttpOracleConfig& cfg, const std::string& role,
                             const std::string& input, int* attempts_out = nullptr);

/// Remote generator. The input string carries the lifted prompt and the
/// exemplars as JSON: {"soft_prompt": [...], "exemplars": [[x, y], ...]}.
/// Empty generations are replaced by a single-token fallback and flagged.
class HttpGenerator final : public GeneratorOracle {
public:
    HttpGenerator(HttpOracleConfig cfg, int lifted_dim, CallBudget* budget = nullptr);

    int lifted_dim() const override { return lifted_dim_; }

    GeneratedInstruction generate(const Vector& lifted,
                                  const std::vector<Exemplar>& exemplars) override;

private:
    HttpOracleConfig cfg_;
    int lifted_dim_;
    CallBudget* budget_;
};

/// Remote predictor. The input string carries the instruction and query as
/// JSON: {"instruction": ..., "query": ...}.
class HttpPredictor final : public PredictorOracle {
public:
    explicit HttpPredictor(HttpOracleConfig cfg, CallBudget* budget = nullptr);

    std::string predict(const Instruction& instruction, const std::string& query) override;

private:
    HttpOracleConfig cfg_;
    CallBudget* budget_;
};

}  // namespace instrbo
