#include "greener/oracle.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace greener {

namespace {

bool contains(const std::vector<Register>& v, Register r) {
  return std::find(v.begin(), v.end(), r) != v.end();
}

// Explores every path starting with `node` as instruction number `depth`.
// Returns nullopt for INF.
std::optional<std::uint32_t> first_access(const Cfg& c, Threshold w,
                                          NodeId node, std::uint32_t depth,
                                          Register r) {
  if (node == c.exit() || depth > w) return std::nullopt;
  if (contains(c.uses(node), r) || contains(c.defs(node), r)) return depth;
  std::uint32_t worst = 0;
  for (NodeId s : c.succ(node)) {
    auto d = first_access(c, w, s, depth + 1, r);
    if (!d) return std::nullopt;
    worst = std::max(worst, *d);
  }
  return worst;
}

}  // namespace

Distance distance_oracle(const Cfg& c, Threshold w, ProgramPoint point,
                         Register r) {
  std::vector<NodeId> starts;
  if (point.side == Side::in)
    starts.push_back(point.instr);
  else
    starts = c.succ(point.instr);
  std::uint32_t worst = 0;
  for (NodeId s : starts) {
    auto d = first_access(c, w, s, 1, r);
    if (!d) return Distance::inf();
    worst = std::max(worst, *d);
  }
  return Distance::finite(worst);
}

bool liveness_oracle(const Cfg& c, ProgramPoint point, Register r) {
  std::vector<bool> seen(c.num_nodes(), false);
  std::vector<NodeId> stack;
  if (point.side == Side::in)
    stack.push_back(point.instr);
  else
    stack = c.succ(point.instr);
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    if (seen[n] || !c.is_instruction(n)) continue;
    seen[n] = true;
    if (contains(c.uses(n), r)) return true;
    if (contains(c.defs(n), r)) continue;
    for (NodeId s : c.succ(n)) stack.push_back(s);
  }
  return false;
}

}  // namespace greener
