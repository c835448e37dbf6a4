#pragma once

#include <vector>

namespace sapg {

/// Edmonds-Karp max flow with real capacities. Arcs are scanned in insertion
/// order, so the resulting flow is reproducible for a fixed construction.
class FlowNetwork {
 public:
  explicit FlowNetwork(int nodes);

  /// Returns the arc id, usable with flow_on().
  int add_arc(int from, int to, double capacity);

  double max_flow(int source, int sink);
  double flow_on(int arc) const;

 private:
  struct Arc {
    int to;
    int rev;
    double cap;
    double flow;
  };
  std::vector<std::vector<Arc>> adj_;
  std::vector<std::pair<int, int>> arc_index_;  // (node, slot)
};

}  // namespace sapg
