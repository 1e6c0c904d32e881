#include "instrbo/http_oracle.hpp"

#include "instrbo/errors.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <thread>

namespace instrbo {

using nlohmann::json;

void HttpOracleConfig::validate() const {
    if (base_url.empty()) throw ConfigError("oracle endpoint URL is not configured");
    if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    if (timeout_ms < 1) throw ConfigError("timeout_ms must be >= 1");
}

std::string http_oracle_call(const HttpOracleConfig& cfg, const std::string& role,
                             const std::string& input, int* attempts_out) {
    cfg.validate();
    httplib::Client client(cfg.base_url);
    client.set_connection_timeout(0, cfg.timeout_ms * 1000);
    client.set_read_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);
    if (!cfg.auth_token.empty()) client.set_bearer_token_auth(cfg.auth_token);

    json request = {{"input", input}, {"role", role}, {"temperature", 0.0}};
    const std::string body = request.dump();

    std::string last_error;
    int backoff_ms = cfg.backoff_initial_ms;
    for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
        if (attempts_out) *attempts_out = attempt;
        auto res = client.Post(cfg.path, body, "application/json");
        if (res && res->status >= 200 && res->status < 300) {
            try {
                json reply = json::parse(res->body);
                return reply.at("text").get<std::string>();
            } catch (const json::exception& e) {
                throw TransportError(
                    "oracle response is not {\"text\": ...}: " + std::string(e.what()), attempt);
            }
        }
        last_error = res ? "HTTP status " + std::to_string(res->status)
                         : "transport failure: " + httplib::to_string(res.error());
        if (attempt < cfg.max_attempts) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
    }
    throw TransportError("oracle call failed after " + std::to_string(cfg.max_attempts) +
                             " attempts (" + last_error + ")",
                         cfg.max_attempts);
}

HttpGenerator::HttpGenerator(HttpOracleConfig cfg, int lifted_dim, CallBudget* budget)
    : cfg_(std::move(cfg)), lifted_dim_(lifted_dim), budget_(budget) {
    cfg_.validate();
    if (lifted_dim_ < 1) throw ConfigError("generator lifted dimension must be >= 1");
}

GeneratedInstruction HttpGenerator::generate(const Vector& lifted,
                                             const std::vector<Exemplar>& exemplars) {
    if (lifted.size() != lifted_dim_) {
        throw ArgumentError("lifted prompt has length " + std::to_string(lifted.size()) +
                            ", generator expects " + std::to_string(lifted_dim_));
    }
    if (budget_) budget_->charge("http generate");

    json payload;
    payload["soft_prompt"] = std::vector<double>(lifted.data(), lifted.data() + lifted.size());
    auto& ex = payload["exemplars"] = json::array();
    for (const auto& e : exemplars) ex.push_back({e.input_text, e.output_text});

    std::string text = http_oracle_call(cfg_, "generator", payload.dump());
    try {
        return {Instruction::from_text(text), false};
    } catch (const ArgumentError&) {
        return {Instruction::from_text("noop"), true};
    }
}

HttpPredictor::HttpPredictor(HttpOracleConfig cfg, CallBudget* budget)
    : cfg_(std::move(cfg)), budget_(budget) {
    cfg_.validate();
}

std::string HttpPredictor::predict(const Instruction& instruction, const std::string& query) {
    if (budget_) budget_->charge("http predict");
    json payload = {{"instruction", instruction.text}, {"query", query}};
    return http_oracle_call(cfg_, "predictor", payload.dump());
}

}  // namespace instrbo
