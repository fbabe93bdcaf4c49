#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gscale/scaling.hpp"

namespace testutil {

inline std::shared_ptr<const gscale::AppSpec> chain_app(const std::vector<double>& et) {
  std::vector<gscale::Microservice> ms;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < static_cast<int>(et.size()); ++i) {
    ms.push_back({i, et[i]});
    if (i > 0) edges.emplace_back(i - 1, i);
  }
  return std::make_shared<const gscale::AppSpec>("chain", ms, edges);
}

// Empty state: PMs only, no VMs, instant transients unless given.
inline gscale::CloudState bare_state(std::shared_ptr<const gscale::AppSpec> app,
                                     gscale::TransientConfig transient = {0.0, 0.0}) {
  gscale::ScenarioConfig cfg;
  cfg.transient = transient;
  return gscale::CloudState(std::move(app), cfg);
}

inline const gscale::VmType& vm_type(const std::string& name) {
  static const auto catalog = gscale::default_vm_catalog();
  return gscale::find_vm_type(catalog, name);
}

}  // namespace testutil
