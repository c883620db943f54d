// Copyright 2026 The fincad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fincad/proposer.hpp"

#include <algorithm>
#include <set>
#include <span>

#include <httplib.h>
#include <json.hpp>

#include "fincad/io.hpp"
#include "fincad/model_gateway.hpp"
#include "fincad/rng.hpp"

namespace fincad {
namespace {

struct Swap {
  std::string from;
  std::vector<std::string> to;
};

const std::vector<Swap>& swaps() {
  static const std::vector<Swap> s{
      {"Recall", {"Remember", "Retrieve from memory", "Think about"}},
      {"training data", {"memory", "pretraining corpus", "knowledge"}},
      {"financial entity", {"company", "stock", "ticker"}},
      {"predict the outcome", {"state what happened next", "report the subsequent price move",
                               "say which way the price went"}},
  };
  return s;
}

const std::vector<std::string>& framings() {
  static const std::vector<std::string> f{
      "As a financial historian reviewing archived records, ",
      "Imagine you are reading the next quarter's market report. ",
      "Answer from memory, not from analysis. ",
      "Be decisive. ",
      "Think carefully. ",
  };
  return f;
}

const std::vector<std::string>& rewrites() {
  static const std::vector<std::string> r{
      "If you had to bet using everything you remember about this stock, which way did it move?",
      "Suppose you have already seen what happened next. Recall it and state the direction.",
      "Consider this company and forecast the direction of its share price.",
      "State the most likely price direction for this entity over the coming quarter.",
  };
  return r;
}

void replace_first(std::string& s, const std::string& from, const std::string& to) {
  if (const auto p = s.find(from); p != std::string::npos) s.replace(p, from.size(), to);
}

}  // namespace

std::vector<std::string> MutationProposer::propose(const std::string& seed, std::size_t count) {
  std::vector<std::string> out;
  std::set<std::string> seen{seed};
  auto add = [&](std::string c) {
    if (!c.empty() && seen.insert(c).second) out.push_back(std::move(c));
  };

  for (const auto& sw : swaps()) {
    if (seed.find(sw.from) == std::string::npos) continue;
    for (const auto& to : sw.to) {
      std::string c = seed;
      replace_first(c, sw.from, to);
      add(std::move(c));
    }
  }
  // Pairwise swaps widen the pool without exploding it.
  for (std::size_t a = 0; a < swaps().size(); ++a) {
    for (std::size_t b = a + 1; b < swaps().size(); ++b) {
      if (seed.find(swaps()[a].from) == std::string::npos ||
          seed.find(swaps()[b].from) == std::string::npos) {
        continue;
      }
      std::string c = seed;
      replace_first(c, swaps()[a].from, swaps()[a].to.front());
      replace_first(c, swaps()[b].from, swaps()[b].to.back());
      add(std::move(c));
    }
  }
  for (const auto& f : framings()) add(f + seed);
  for (const auto& r : rewrites()) add(r);

  Rng rng(rng_seed_);
  rng.shuffle(std::span<std::string>(out));
  if (out.size() > count) out.resize(count);
  return out;
}

std::vector<std::string> HttpProposer::propose(const std::string& seed, std::size_t count) {
  using json = nlohmann::json;
  const auto scheme = config_.endpoint.find("://");
  if (scheme == std::string::npos) {
    throw ProviderError(ProviderErrorKind::kBadInput, "proposer endpoint must be an absolute URL");
  }
  const auto slash = config_.endpoint.find('/', scheme + 3);
  const std::string host = config_.endpoint.substr(0, slash);
  const std::string path =
      slash == std::string::npos ? "/v1/completions" : config_.endpoint.substr(slash);

  httplib::Client client(host);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  if (!config_.api_token.empty()) client.set_bearer_token_auth(config_.api_token);

  const std::string meta =
      "Rewrite the following instruction for a language model in a different way, keeping its "
      "intent. Reply with the rewritten instruction only.\n\nInstruction: " +
      seed + "\n\nRewritten instruction:";
  const json req{{"model", config_.model},        {"prompt", meta},
                 {"max_tokens", 96},             {"temperature", config_.temperature},
                 {"n", static_cast<int>(count)}};
  auto res = client.Post(path, req.dump(), "application/json");
  if (!res) {
    throw ProviderError(ProviderErrorKind::kTransport,
                        "proposer request failed: " + httplib::to_string(res.error()));
  }
  if (res->status >= 400) {
    throw ProviderError(res->status == 429 || res->status >= 500 ? ProviderErrorKind::kServer
                                                                 : ProviderErrorKind::kRequest,
                        "proposer endpoint returned HTTP " + std::to_string(res->status));
  }
  std::vector<std::string> out;
  try {
    const json j = json::parse(res->body);
    for (const auto& choice : j.at("choices")) {
      std::string text(trim(choice.value("text", std::string())));
      if (const auto nl = text.find('\n'); nl != std::string::npos) text.resize(nl);
      if (!text.empty()) out.push_back(std::move(text));
    }
  } catch (const json::exception& e) {
    throw ProviderError(ProviderErrorKind::kServer,
                        std::string("unparseable proposer response: ") + e.what());
  }
  if (out.size() > count) out.resize(count);
  return out;
}

}  // namespace fincad
