#pragma once

#include <string>
#include <vector>

#include "fixture_gen.hpp"
#include "modgate/errlab.hpp"

// One result per matrix cell count, in gold-major order.
inline std::vector<modgate::CommentResult> results_from(const modgate::fixtures::Matrix& m,
                                                        const std::string& version,
                                                        const std::string& model) {
  using namespace modgate;
  std::vector<CommentResult> out;
  for (Category g : kAllCategories) {
    for (const auto& [p, n] : m[index_of(g)]) {
      for (std::uint64_t i = 0; i < n; ++i) {
        CommentResult r;
        r.id = "s-" + std::to_string(out.size());
        r.gold = g;
        r.primary = p;
        r.labels = {{p, 0.9}};
        r.reasoning = "because " + std::string(name_of(p));
        r.prompt_version = version;
        r.model_id = model;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

inline modgate::ConfusionMatrix confusion_of(const modgate::fixtures::Matrix& m) {
  modgate::ConfusionMatrix c;
  for (modgate::Category g : modgate::kAllCategories)
    for (const auto& [p, n] : m[modgate::index_of(g)]) c.add(g, p, n);
  return c;
}
