#include "greener/cfg.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

namespace greener {

bool Cfg::accesses(NodeId n, Register r) const {
  if (!is_instruction(n)) return false;
  auto has = [r](const std::vector<Register>& v) {
    return std::find(v.begin(), v.end(), r) != v.end();
  };
  return has(uses_[n]) || has(defs_[n]);
}

namespace {

std::vector<bool> reach(const std::vector<std::vector<NodeId>>& edges,
                        NodeId from) {
  std::vector<bool> seen(edges.size(), false);
  std::vector<NodeId> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    for (NodeId m : edges[n])
      if (!seen[m]) {
        seen[m] = true;
        stack.push_back(m);
      }
  }
  return seen;
}

}  // namespace

Cfg build_cfg(const Program& p) {
  const std::size_t n = p.size();
  Cfg c;
  c.succ_.assign(n + 2, {});
  c.pred_.assign(n + 2, {});
  c.uses_.resize(n);
  c.defs_.resize(n);
  const NodeId entry = n, exit = n + 1;

  std::set<Register> regs;
  auto add_edge = [&](NodeId a, NodeId b) {
    if (std::find(c.succ_[a].begin(), c.succ_[a].end(), b) != c.succ_[a].end())
      return;
    c.succ_[a].push_back(b);
    c.pred_[b].push_back(a);
  };
  auto fallthrough = [&](InstrId i) {
    if (i + 1 >= n)
      throw CfgError("instruction " + std::to_string(i) +
                     " falls through past the end of the program");
    add_edge(i, i + 1);
  };

  add_edge(entry, n == 0 ? exit : 0);
  for (InstrId i = 0; i < n; ++i) {
    const Instruction& ins = p[i];
    c.uses_[i] = register_uses(ins);
    c.defs_[i] = register_defs(ins);
    regs.insert(c.uses_[i].begin(), c.uses_[i].end());
    regs.insert(c.defs_[i].begin(), c.defs_[i].end());
    if (ins.is_branch()) {
      auto it = p.labels.find(ins.branch_target());
      if (it == p.labels.end())
        throw CfgError("unresolved label '" + ins.branch_target() + "'");
      add_edge(i, it->second);
      if (ins.guard) fallthrough(i);
    } else if (ins.is_exit()) {
      add_edge(i, exit);
      if (ins.guard) fallthrough(i);
    } else {
      fallthrough(i);
    }
  }
  for (auto& v : c.succ_) std::sort(v.begin(), v.end());
  for (auto& v : c.pred_) std::sort(v.begin(), v.end());
  c.registers_.assign(regs.begin(), regs.end());

  auto fwd = reach(c.succ_, entry);
  auto bwd = reach(c.pred_, exit);
  for (InstrId i = 0; i < n; ++i) {
    if (!fwd[i])
      throw CfgError("instruction " + std::to_string(i) + " is unreachable");
    if (!bwd[i])
      throw CfgError("instruction " + std::to_string(i) +
                     " has no path to exit");
  }
  return c;
}

std::string to_string(ProgramPoint p) {
  return (p.side == Side::in ? "IN(" : "OUT(") + std::to_string(p.instr) + ")";
}

std::vector<ProgramPoint> program_points(const Cfg& c) {
  std::vector<ProgramPoint> pts;
  pts.reserve(2 * c.num_instructions());
  for (InstrId i = 0; i < c.num_instructions(); ++i) {
    pts.push_back(in_of(i));
    pts.push_back(out_of(i));
  }
  return pts;
}

void write_dot(std::ostream& os, const Program& p, const Cfg& c) {
  const std::size_t n = p.size();
  std::vector<bool> leader(n, false);
  for (InstrId i = 0; i < n; ++i) {
    if (i == 0 || p[i].label) leader[i] = true;
    if (p[i].is_control() && i + 1 < n) leader[i + 1] = true;
  }
  std::vector<std::size_t> block_of(n);
  std::vector<std::pair<InstrId, InstrId>> blocks;  // [first, last]
  for (InstrId i = 0; i < n; ++i) {
    if (leader[i]) blocks.push_back({i, i});
    blocks.back().second = i;
    block_of[i] = blocks.size() - 1;
  }
  auto name = [&](std::size_t b) {
    const auto& first = p[blocks[b].first];
    return first.label ? *first.label : "BB" + std::to_string(b);
  };

  os << "digraph cfg {\n  node [shape=box, fontname=monospace];\n";
  os << "  Entry [shape=oval];\n  Exit [shape=oval];\n";
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    os << "  \"" << name(b) << "\" [label=\"" << name(b) << ":\\l";
    for (InstrId i = blocks[b].first; i <= blocks[b].second; ++i) {
      Program one;
      one.instructions.push_back(p[i]);
      one.instructions.back().label.reset();
      std::string text = serialize_program(one, true);
      while (!text.empty() && (text.back() == '\n' || text.front() == ' ')) {
        if (text.back() == '\n')
          text.pop_back();
        else
          text.erase(0, 1);
      }
      os << text << "\\l";
    }
    os << "\"];\n";
  }
  os << "  Entry -> " << (n ? "\"" + name(0) + "\"" : std::string("Exit"))
     << ";\n";
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (NodeId s : c.succ(blocks[b].second))
      os << "  \"" << name(b) << "\" -> "
         << (s == c.exit() ? std::string("Exit") : "\"" + name(block_of[s]) + "\"")
         << ";\n";
  os << "}\n";
}

}  // namespace greener
