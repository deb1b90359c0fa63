#include "bdar/state_io.hpp"

#include <stdexcept>

namespace bdar {

using nlohmann::json;

json state_to_json(const NetworkState& state) {
  json direct = json::array();
  json indirect = json::array();
  for (std::size_t r = 0; r < state.route_id_count(); ++r) {
    const int c = state.route_calls(r);
    if (c == 0) continue;
    const Route route = state.route(r);
    if (route.is_direct()) {
      direct.push_back({route.endpoints.u + 1, route.endpoints.v + 1, c});
    } else {
      indirect.push_back({route.endpoints.u + 1, route.endpoints.v + 1, route.via + 1, c});
    }
  }
  return json{{"n", state.n()}, {"C", state.capacity()}, {"direct", direct}, {"indirect", indirect}};
}

namespace {

int node_label(const json& v, int n) {
  const int label = v.get<int>();
  if (label < 1 || label > n) {
    throw std::invalid_argument("node label " + std::to_string(label) + " out of range 1.." + std::to_string(n));
  }
  return label - 1;
}

}  // namespace

NetworkState state_from_json(const json& doc) {
  try {
    const int n = doc.at("n").get<int>();
    const int C = doc.at("C").get<int>();
    NetworkState state(n, C);
    std::vector<int> direct(static_cast<std::size_t>(state.pair_count()), 0);
    std::vector<int> indirect(static_cast<std::size_t>(state.pair_count()) * n, 0);
    const Topology& topo = state.topology();

    for (const auto& row : doc.value("direct", json::array())) {
      if (!row.is_array() || row.size() != 3) throw std::invalid_argument("direct rows are [u,v,count]");
      const int u = node_label(row[0], n);
      const int v = node_label(row[1], n);
      if (u == v) throw std::invalid_argument("direct route with identical endpoints");
      direct[static_cast<std::size_t>(topo.link(u, v))] += row[2].get<int>();
    }
    for (const auto& row : doc.value("indirect", json::array())) {
      if (!row.is_array() || row.size() != 4) throw std::invalid_argument("indirect rows are [u,v,w,count]");
      const int u = node_label(row[0], n);
      const int v = node_label(row[1], n);
      const int w = node_label(row[2], n);
      if (u == v || w == u || w == v) throw std::invalid_argument("indirect route needs three distinct nodes");
      indirect[static_cast<std::size_t>(topo.link(u, v)) * n + static_cast<std::size_t>(w)] += row[3].get<int>();
    }
    NetworkState loaded = NetworkState::from_counts(n, C, std::move(direct), std::move(indirect));
    const auto violations = validate(loaded);
    if (!violations.empty()) {
      std::string msg = "infeasible state:";
      for (const auto& v : violations) msg += " [" + v.kind + ": " + v.detail + "]";
      throw std::invalid_argument(msg);
    }
    return loaded;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed state JSON: ") + e.what());
  }
}

}  // namespace bdar
