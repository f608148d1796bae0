#pragma once

// GASM: a small PTXPlus-flavoured assembly dialect whose instructions may
// carry a trailing list of register power states.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace greener {

using InstrId = std::size_t;

enum class RegKind : std::uint8_t { general, predicate, offset, output };

struct Register {
  RegKind kind = RegKind::general;
  std::uint32_t index = 0;

  auto operator<=>(const Register&) const = default;
};

constexpr Register gpr(std::uint32_t i) { return {RegKind::general, i}; }
constexpr Register pred(std::uint32_t i) { return {RegKind::predicate, i}; }

/// Textual name without the leading `$`, e.g. `r0`, `p2`, `ofs1`, `o127`.
std::string to_string(Register r);

enum class PowerState : std::uint8_t { off = 0, sleep = 1, on = 2 };

std::string_view to_string(PowerState s);
std::optional<PowerState> parse_power_state(std::string_view token);

/// Immediate value. The digit count is kept so that `0x00000002`
/// serializes back unchanged.
struct Imm {
  std::uint64_t value = 0;
  bool hex = true;
  std::uint8_t digits = 0;

  bool operator==(const Imm&) const = default;
};

enum class MemSpace : std::uint8_t { global, shared };

/// `[$r11]`, `[$r11+0x10]`, `s[0x0018]` or `s[$ofs1+0x0000]`.
struct MemRef {
  MemSpace space = MemSpace::global;
  std::optional<Register> base;
  std::optional<Imm> offset;

  bool operator==(const MemRef&) const = default;
};

struct LabelRef {
  std::string name;

  bool operator==(const LabelRef&) const = default;
};

using Operand = std::variant<Register, Imm, MemRef, LabelRef>;

struct Guard {
  Register reg;
  std::string cond;

  bool operator==(const Guard&) const = default;
};

struct Instruction {
  InstrId id = 0;
  std::optional<std::string> label;
  std::optional<Guard> guard;
  std::string opcode;
  std::vector<std::string> options;
  std::vector<Operand> destinations;
  std::vector<Operand> sources;
  std::optional<std::vector<PowerState>> power_list;

  bool is_branch() const { return opcode == "bra"; }
  bool is_exit() const { return opcode == "exit"; }
  /// Branches and exits never carry power states.
  bool is_control() const { return is_branch() || is_exit(); }
  /// Target label of a `bra`.
  const std::string& branch_target() const;

  bool operator==(const Instruction&) const = default;
};

struct Program {
  std::vector<Instruction> instructions;
  std::map<std::string, InstrId, std::less<>> labels;

  bool empty() const { return instructions.empty(); }
  std::size_t size() const { return instructions.size(); }
  const Instruction& operator[](InstrId id) const { return instructions[id]; }

  bool operator==(const Program&) const = default;
};

class GasmError : public std::runtime_error {
 public:
  GasmError(const std::string& what, std::size_t line, std::size_t column);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

Program parse_program(std::string_view text);
std::string serialize_program(const Program& p, bool with_power = true);

/// Drops every power list.
Program strip_power(Program p);

/// Registers read by `i`: guard predicate, memory base registers, then plain
/// register sources. Each register appears once.
std::vector<Register> register_uses(const Instruction& i);

/// Plain register destinations.
std::vector<Register> register_defs(const Instruction& i);

/// register_uses ++ register_defs, deduplicated, uses first.
std::vector<Register> register_accesses(const Instruction& i);

/// Registers whose power state is encoded in the instruction: the first
/// plain-register destination, then the first two plain-register sources.
/// Duplicates are kept (`add $r0, $r0, $r5` yields r0, r0, r5).
std::vector<Register> encodable_slots(const Instruction& i);

bool accesses(const Instruction& i, Register r);

/// FNV-1a over the power-free serialization; identifies the program a
/// simulation ran regardless of annotation.
std::uint64_t program_hash(const Program& p);

}  // namespace greener
