#include "sapg/maxflow.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace sapg {

namespace {
constexpr double kResidualEps = 1e-15;
}

FlowNetwork::FlowNetwork(int nodes) : adj_(static_cast<std::size_t>(nodes)) {}

int FlowNetwork::add_arc(int from, int to, double capacity) {
  auto& out = adj_[static_cast<std::size_t>(from)];
  auto& in = adj_[static_cast<std::size_t>(to)];
  out.push_back({to, static_cast<int>(in.size()), capacity, 0.0});
  in.push_back({from, static_cast<int>(out.size()) - 1, 0.0, 0.0});
  arc_index_.emplace_back(from, static_cast<int>(out.size()) - 1);
  return static_cast<int>(arc_index_.size()) - 1;
}

double FlowNetwork::max_flow(int source, int sink) {
  const std::size_t n = adj_.size();
  double total = 0.0;
  std::vector<std::pair<int, int>> via(n);
  for (;;) {
    std::fill(via.begin(), via.end(), std::pair{-1, -1});
    via[static_cast<std::size_t>(source)] = {source, -1};
    std::queue<int> frontier;
    frontier.push(source);
    while (!frontier.empty() && via[static_cast<std::size_t>(sink)].first < 0) {
      const int node = frontier.front();
      frontier.pop();
      const auto& arcs = adj_[static_cast<std::size_t>(node)];
      for (int slot = 0; slot < static_cast<int>(arcs.size()); ++slot) {
        const Arc& a = arcs[static_cast<std::size_t>(slot)];
        if (via[static_cast<std::size_t>(a.to)].first >= 0) continue;
        if (a.cap - a.flow <= kResidualEps) continue;
        via[static_cast<std::size_t>(a.to)] = {node, slot};
        frontier.push(a.to);
      }
    }
    if (via[static_cast<std::size_t>(sink)].first < 0) break;

    double bottleneck = std::numeric_limits<double>::infinity();
    for (int v = sink; v != source;) {
      auto [u, slot] = via[static_cast<std::size_t>(v)];
      const Arc& a = adj_[static_cast<std::size_t>(u)][static_cast<std::size_t>(slot)];
      bottleneck = std::min(bottleneck, a.cap - a.flow);
      v = u;
    }
    for (int v = sink; v != source;) {
      auto [u, slot] = via[static_cast<std::size_t>(v)];
      Arc& a = adj_[static_cast<std::size_t>(u)][static_cast<std::size_t>(slot)];
      a.flow += bottleneck;
      adj_[static_cast<std::size_t>(v)][static_cast<std::size_t>(a.rev)].flow -= bottleneck;
      v = u;
    }
    total += bottleneck;
  }
  return total;
}

double FlowNetwork::flow_on(int arc) const {
  auto [node, slot] = arc_index_.at(static_cast<std::size_t>(arc));
  return adj_[static_cast<std::size_t>(node)][static_cast<std::size_t>(slot)].flow;
}

}  // namespace sapg
