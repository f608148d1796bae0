#include "greener/gasm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

namespace greener {

std::string to_string(Register r) {
  switch (r.kind) {
    case RegKind::general:
      return "r" + std::to_string(r.index);
    case RegKind::predicate:
      return "p" + std::to_string(r.index);
    case RegKind::offset:
      return "ofs" + std::to_string(r.index);
    case RegKind::output:
      return "o" + std::to_string(r.index);
  }
  return "?";
}

std::string_view to_string(PowerState s) {
  switch (s) {
    case PowerState::on:
      return "ON";
    case PowerState::sleep:
      return "SLEEP";
    case PowerState::off:
      return "OFF";
  }
  return "?";
}

std::optional<PowerState> parse_power_state(std::string_view token) {
  if (token == "ON") return PowerState::on;
  if (token == "SLEEP") return PowerState::sleep;
  if (token == "OFF") return PowerState::off;
  return std::nullopt;
}

const std::string& Instruction::branch_target() const {
  for (const auto& op : sources)
    if (const auto* l = std::get_if<LabelRef>(&op)) return l->name;
  throw std::logic_error("instruction " + std::to_string(id) +
                         " has no branch target");
}

GasmError::GasmError(const std::string& what, std::size_t line,
                     std::size_t column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) +
                         ": " + what),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { ident, reg, number, punct, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    std::size_t start = i;
    std::size_t l = line, cl = col;
    if (c == '$') {
      std::size_t j = i + 1;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      out.push_back({Tok::reg, std::string(text.substr(start, j - start)), l, cl});
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      out.push_back({Tok::number, std::string(text.substr(start, j - start)), l, cl});
      advance(j - i);
    } else if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      out.push_back({Tok::ident, std::string(text.substr(start, j - start)), l, cl});
      advance(j - i);
    } else if (std::string_view(":;,@./[]+").find(c) != std::string_view::npos) {
      out.push_back({Tok::punct, std::string(1, c), l, cl});
      advance(1);
    } else {
      throw GasmError(std::string("unexpected character '") + c + "'", l, cl);
    }
  }
  out.push_back({Tok::end, "", line, col});
  return out;
}

// Opcodes whose operands are all sources.
bool has_destination(std::string_view opcode) {
  static const std::set<std::string_view> no_dest = {"bra", "exit", "ssy",
                                                     "nop", "bar", "ret"};
  return !no_dest.contains(opcode);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  Program run() {
    Program p;
    std::vector<std::pair<std::string, const Token*>> refs;
    while (peek().kind != Tok::end) {
      Instruction ins = instruction();
      ins.id = p.instructions.size();
      if (ins.label) {
        if (p.labels.contains(*ins.label))
          throw GasmError("duplicate label '" + *ins.label + "'",
                          label_tok_->line, label_tok_->column);
        p.labels.emplace(*ins.label, ins.id);
      }
      if (ins.is_branch()) refs.emplace_back(ins.branch_target(), target_tok_);
      p.instructions.push_back(std::move(ins));
    }
    for (const auto& [name, tok] : refs)
      if (!p.labels.contains(name))
        throw GasmError("unresolved label '" + name + "'", tok->line,
                        tok->column);
    return p;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = peek();
    if (t.kind != Tok::end) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string& what, const Token& t) const {
    throw GasmError(what, t.line, t.column);
  }
  bool at_punct(char c, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::punct && t.text[0] == c;
  }
  void expect_punct(char c) {
    if (!at_punct(c))
      fail(std::string("expected '") + c + "'" +
               (peek().kind == Tok::end ? " before end of input"
                                        : " near '" + peek().text + "'"),
           peek());
    next();
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != Tok::ident) fail(std::string("expected ") + what, peek());
    return next().text;
  }

  Register reg(const Token& t) {
    std::string_view s = t.text;
    s.remove_prefix(1);
    std::size_t split = 0;
    while (split < s.size() && std::isalpha(static_cast<unsigned char>(s[split])))
      ++split;
    std::string_view prefix = s.substr(0, split), digits = s.substr(split);
    Register r;
    if (prefix == "r")
      r.kind = RegKind::general;
    else if (prefix == "p")
      r.kind = RegKind::predicate;
    else if (prefix == "ofs")
      r.kind = RegKind::offset;
    else if (prefix == "o")
      r.kind = RegKind::output;
    else
      fail("malformed register '" + t.text + "'", t);
    auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), r.index);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size())
      fail("malformed register '" + t.text + "'", t);
    return r;
  }

  Register expect_reg() {
    if (peek().kind != Tok::reg) fail("expected register", peek());
    return reg(next());
  }

  Imm imm(const Token& t) {
    std::string_view s = t.text;
    Imm v;
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
      s.remove_prefix(2);
      base = 16;
      v.hex = true;
      v.digits = static_cast<std::uint8_t>(s.size());
    } else {
      v.hex = false;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v.value, base);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
      fail("malformed immediate '" + t.text + "'", t);
    return v;
  }

  MemRef memref(MemSpace space) {
    MemRef m;
    m.space = space;
    expect_punct('[');
    if (peek().kind == Tok::reg) {
      m.base = reg(next());
      if (at_punct('+')) {
        next();
        if (peek().kind != Tok::number) fail("expected offset", peek());
        m.offset = imm(next());
      }
    } else if (peek().kind == Tok::number) {
      m.offset = imm(next());
    } else {
      fail("expected register or offset in memory operand", peek());
    }
    expect_punct(']');
    if (space == MemSpace::global && !m.base)
      fail("global memory operand needs a base register", peek());
    return m;
  }

  Operand operand() {
    const Token& t = peek();
    if (t.kind == Tok::reg) return reg(next());
    if (t.kind == Tok::number) return imm(next());
    if (at_punct('[')) return memref(MemSpace::global);
    if (t.kind == Tok::ident && t.text == "s" && at_punct('[', 1)) {
      next();
      return memref(MemSpace::shared);
    }
    if (t.kind == Tok::ident) return LabelRef{next().text};
    fail("expected operand", t);
  }

  bool at_power_token() const {
    return peek().kind == Tok::ident && parse_power_state(peek().text);
  }

  Instruction instruction() {
    Instruction ins;
    label_tok_ = nullptr;
    target_tok_ = nullptr;
    if (peek().kind == Tok::ident && at_punct(':', 1)) {
      label_tok_ = &peek();
      ins.label = next().text;
      next();
    }
    if (at_punct('@')) {
      next();
      Register g = expect_reg();
      expect_punct('.');
      ins.guard = Guard{g, expect_ident("guard condition")};
    }
    const Token& op_tok = peek();
    ins.opcode = expect_ident("opcode");
    while (at_punct('.')) {
      next();
      const Token& t = next();
      if (t.kind != Tok::ident && t.kind != Tok::number)
        fail("expected option after '.'", t);
      ins.options.push_back(t.text);
    }

    std::vector<Operand> operands;
    bool dual = false;
    std::vector<PowerState> power;
    bool have_power = false;
    if (!at_punct(';')) {
      bool first = true;
      while (true) {
        if (at_power_token()) {
          have_power = true;
          power.push_back(*parse_power_state(next().text));
        } else {
          if (have_power) fail("operand after power states", peek());
          const Token& ot = peek();
          operands.push_back(operand());
          if (std::holds_alternative<LabelRef>(operands.back()))
            target_tok_ = &ot;
          if (first && at_punct('/')) {
            next();
            operands.push_back(expect_reg());
            dual = true;
          }
        }
        first = false;
        if (at_punct(',')) {
          next();
          continue;
        }
        break;
      }
    }
    expect_punct(';');

    if (dual && !has_destination(ins.opcode))
      fail("dual destination on '" + ins.opcode + "'", op_tok);
    if (has_destination(ins.opcode) && !operands.empty()) {
      std::size_t ndest = dual ? 2 : 1;
      ins.destinations.assign(operands.begin(), operands.begin() + ndest);
      ins.sources.assign(operands.begin() + ndest, operands.end());
    } else {
      ins.sources = std::move(operands);
    }

    if (ins.is_branch()) {
      if (ins.sources.size() != 1 || !std::holds_alternative<LabelRef>(ins.sources[0]))
        fail("bra takes exactly one label operand", op_tok);
    } else if (target_tok_) {
      fail("label operand outside a branch", *target_tok_);
    }
    if (ins.is_exit() && !ins.sources.empty())
      fail("exit takes no operands", op_tok);

    if (have_power) {
      if (ins.is_control())
        fail("'" + ins.opcode + "' cannot carry power states", op_tok);
      std::size_t slots = encodable_slots(ins).size();
      if (power.size() != slots)
        fail("power list has " + std::to_string(power.size()) +
                 " entries, instruction has " + std::to_string(slots) +
                 " encodable registers",
             op_tok);
      ins.power_list = std::move(power);
    }
    return ins;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Token* label_tok_ = nullptr;
  const Token* target_tok_ = nullptr;
};

std::string imm_text(const Imm& v) {
  if (!v.hex) return std::to_string(v.value);
  std::ostringstream os;
  os << std::hex << v.value;
  std::string digits = os.str();
  if (digits.size() < v.digits) digits.insert(0, v.digits - digits.size(), '0');
  return "0x" + digits;
}

std::string operand_text(const Operand& op) {
  struct Visitor {
    std::string operator()(const Register& r) const { return "$" + to_string(r); }
    std::string operator()(const Imm& v) const { return imm_text(v); }
    std::string operator()(const LabelRef& l) const { return l.name; }
    std::string operator()(const MemRef& m) const {
      std::string s = m.space == MemSpace::shared ? "s[" : "[";
      if (m.base) s += "$" + to_string(*m.base);
      if (m.base && m.offset) s += "+";
      if (m.offset) s += imm_text(*m.offset);
      return s + "]";
    }
  };
  return std::visit(Visitor{}, op);
}

void push_unique(std::vector<Register>& v, Register r) {
  if (std::find(v.begin(), v.end(), r) == v.end()) v.push_back(r);
}

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).run(); }

std::string serialize_program(const Program& p, bool with_power) {
  std::string out;
  for (const auto& ins : p.instructions) {
    out += ins.label ? *ins.label + ": " : std::string(4, ' ');
    if (ins.guard)
      out += "@$" + to_string(ins.guard->reg) + "." + ins.guard->cond + " ";
    out += ins.opcode;
    for (const auto& o : ins.options) out += "." + o;
    std::vector<std::string> parts;
    if (!ins.destinations.empty()) {
      std::string d;
      for (std::size_t k = 0; k < ins.destinations.size(); ++k)
        d += (k ? "/" : "") + operand_text(ins.destinations[k]);
      parts.push_back(std::move(d));
    }
    for (const auto& s : ins.sources) parts.push_back(operand_text(s));
    if (with_power && ins.power_list)
      for (PowerState s : *ins.power_list) parts.emplace_back(to_string(s));
    for (std::size_t k = 0; k < parts.size(); ++k)
      out += (k ? ", " : " ") + parts[k];
    out += ";\n";
  }
  return out;
}

Program strip_power(Program p) {
  for (auto& ins : p.instructions) ins.power_list.reset();
  return p;
}

std::vector<Register> register_uses(const Instruction& i) {
  std::vector<Register> out;
  if (i.guard) push_unique(out, i.guard->reg);
  for (const auto* ops : {&i.sources, &i.destinations})
    for (const auto& op : *ops)
      if (const auto* m = std::get_if<MemRef>(&op); m && m->base)
        push_unique(out, *m->base);
  for (const auto& op : i.sources)
    if (const auto* r = std::get_if<Register>(&op)) push_unique(out, *r);
  return out;
}

std::vector<Register> register_defs(const Instruction& i) {
  std::vector<Register> out;
  for (const auto& op : i.destinations)
    if (const auto* r = std::get_if<Register>(&op)) push_unique(out, *r);
  return out;
}

std::vector<Register> register_accesses(const Instruction& i) {
  std::vector<Register> out = register_uses(i);
  for (Register r : register_defs(i)) push_unique(out, r);
  return out;
}

std::vector<Register> encodable_slots(const Instruction& i) {
  std::vector<Register> out;
  if (i.is_control()) return out;
  if (!i.destinations.empty())
    if (const auto* r = std::get_if<Register>(&i.destinations.front()))
      out.push_back(*r);
  int srcs = 0;
  for (const auto& op : i.sources) {
    if (srcs == 2) break;
    if (const auto* r = std::get_if<Register>(&op)) {
      out.push_back(*r);
      ++srcs;
    }
  }
  return out;
}

bool accesses(const Instruction& i, Register r) {
  auto a = register_accesses(i);
  return std::find(a.begin(), a.end(), r) != a.end();
}

std::uint64_t program_hash(const Program& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_program(p, false)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace greener
