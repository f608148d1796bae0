#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "greener/gasm.hpp"

namespace greener {

/// Node ids: instructions are 0..n-1, then Entry (n) and Exit (n+1).
using NodeId = std::size_t;

class CfgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Instruction-granular control-flow graph with synthetic Entry and Exit.
/// Each instruction node also records the registers it reads and writes so
/// that analyses need only the graph.
class Cfg {
 public:
  std::size_t num_instructions() const { return uses_.size(); }
  std::size_t num_nodes() const { return succ_.size(); }
  NodeId entry() const { return num_instructions(); }
  NodeId exit() const { return num_instructions() + 1; }
  bool is_instruction(NodeId n) const { return n < num_instructions(); }

  const std::vector<NodeId>& succ(NodeId n) const { return succ_[n]; }
  const std::vector<NodeId>& pred(NodeId n) const { return pred_[n]; }

  const std::vector<Register>& uses(NodeId n) const { return uses_[n]; }
  const std::vector<Register>& defs(NodeId n) const { return defs_[n]; }
  bool accesses(NodeId n, Register r) const;

  /// Every register mentioned by any instruction, sorted.
  const std::vector<Register>& registers() const { return registers_; }

 private:
  friend Cfg build_cfg(const Program& p);

  std::vector<std::vector<NodeId>> succ_;
  std::vector<std::vector<NodeId>> pred_;
  std::vector<std::vector<Register>> uses_;
  std::vector<std::vector<Register>> defs_;
  std::vector<Register> registers_;
};

/// Throws CfgError on unreachable code, fall-through past the last
/// instruction, or a node that cannot reach Exit.
Cfg build_cfg(const Program& p);

enum class Side : std::uint8_t { in, out };

struct ProgramPoint {
  InstrId instr = 0;
  Side side = Side::in;

  auto operator<=>(const ProgramPoint&) const = default;
};

inline ProgramPoint in_of(InstrId i) { return {i, Side::in}; }
inline ProgramPoint out_of(InstrId i) { return {i, Side::out}; }

std::string to_string(ProgramPoint p);

/// IN and OUT of every instruction, in instruction order.
std::vector<ProgramPoint> program_points(const Cfg& c);

/// Basic-block view of the graph in DOT syntax.
void write_dot(std::ostream& os, const Program& p, const Cfg& c);

}  // namespace greener
