#pragma once

// Liveness and saturating next-access distance over the instruction CFG,
// and the (isLive, SleepOff) -> PowerState classification built on them.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "greener/cfg.hpp"
#include "greener/gasm.hpp"

namespace greener {

/// Minimum instruction distance that pays for a wake-up. Must be >= 1.
using Threshold = std::uint32_t;

inline constexpr Threshold kDefaultThreshold = 3;

/// Element of the chain 1 < 2 < ... < W < INF.
class Distance {
 public:
  constexpr Distance() = default;
  static constexpr Distance finite(std::uint32_t k) { return Distance(k); }
  static constexpr Distance inf() { return Distance(kInf); }

  constexpr bool is_inf() const { return value_ == kInf; }
  /// Only meaningful when !is_inf().
  constexpr std::uint32_t value() const { return value_; }

  constexpr auto operator<=>(const Distance&) const = default;

 private:
  static constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();
  constexpr explicit Distance(std::uint32_t v) : value_(v) {}
  std::uint32_t value_ = 1;
};

std::string to_string(Distance d);

/// Saturating increment: INF when d is W or INF, d+1 otherwise.
constexpr Distance inc(Distance d, Threshold w) {
  if (d.is_inf() || d.value() >= w) return Distance::inf();
  return Distance::finite(d.value() + 1);
}

constexpr bool sleep_off(Distance d) { return d.is_inf(); }

/// Power state at a point from liveness and the SleepOff predicate.
constexpr PowerState classify(bool live, bool sleepoff) {
  if (!sleepoff) return PowerState::on;
  return live ? PowerState::sleep : PowerState::off;
}

/// Per-point facts, indexed by instruction and by position of the register
/// in Cfg::registers().
template <typename Fact>
class PointMap {
 public:
  PointMap() = default;
  PointMap(std::size_t instructions, std::size_t registers, Fact init)
      : regs_(registers),
        in_(instructions * registers, init),
        out_(instructions * registers, init) {}

  Fact& at(ProgramPoint p, std::size_t reg) {
    return (p.side == Side::in ? in_ : out_)[p.instr * regs_ + reg];
  }
  const Fact& at(ProgramPoint p, std::size_t reg) const {
    return (p.side == Side::in ? in_ : out_)[p.instr * regs_ + reg];
  }
  std::size_t registers() const { return regs_; }

  bool operator==(const PointMap&) const = default;

 private:
  std::size_t regs_ = 0;
  // std::vector<bool> would pack, but element references are needed.
  std::vector<Fact> in_;
  std::vector<Fact> out_;
};

using LiveMap = PointMap<std::uint8_t>;
using DistanceMap = PointMap<Distance>;

LiveMap liveness(const Cfg& c);
DistanceMap distance(const Cfg& c, Threshold w);

class AnalysisResult {
 public:
  AnalysisResult(Cfg cfg, LiveMap live, DistanceMap dist, Threshold w);

  const Cfg& cfg() const { return cfg_; }
  Threshold threshold() const { return w_; }

  /// Registers never mentioned by the program are dead with INF distance.
  bool live(ProgramPoint p, Register r) const;
  Distance dist(ProgramPoint p, Register r) const;
  bool sleep_off(ProgramPoint p, Register r) const { return greener::sleep_off(dist(p, r)); }

  /// Power at OUT(i), defined only for registers accessed by instruction i.
  std::optional<PowerState> power(InstrId i, Register r) const;

 private:
  std::optional<std::size_t> slot(Register r) const;

  Cfg cfg_;
  LiveMap live_;
  DistanceMap dist_;
  Threshold w_;
};

/// Builds the CFG and runs both analyses. CfgError propagates.
AnalysisResult analyze(const Program& p, Threshold w);

/// `point,reg,live,dist,power` rows for every point and register.
void write_facts_csv(std::ostream& os, const AnalysisResult& a);

}  // namespace greener
