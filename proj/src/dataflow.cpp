#include "greener/dataflow.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <stdexcept>

namespace greener {

std::string to_string(Distance d) {
  return d.is_inf() ? "inf" : std::to_string(d.value());
}

namespace {

std::size_t index_of(const std::vector<Register>& regs, Register r) {
  return static_cast<std::size_t>(
      std::lower_bound(regs.begin(), regs.end(), r) - regs.begin());
}

// Backward worklist driver: `transfer(n)` recomputes the facts of
// instruction n and reports whether IN(n) changed.
template <typename Transfer>
void solve_backward(const Cfg& c, Transfer transfer) {
  const std::size_t n = c.num_instructions();
  std::deque<NodeId> work;
  std::vector<bool> queued(n, true);
  for (NodeId i = n; i-- > 0;) work.push_back(i);
  while (!work.empty()) {
    NodeId i = work.front();
    work.pop_front();
    queued[i] = false;
    if (!transfer(i)) continue;
    for (NodeId p : c.pred(i))
      if (c.is_instruction(p) && !queued[p]) {
        queued[p] = true;
        work.push_back(p);
      }
  }
}

}  // namespace

LiveMap liveness(const Cfg& c) {
  const auto& regs = c.registers();
  const std::size_t nr = regs.size();
  LiveMap live(c.num_instructions(), nr, 0);

  std::vector<std::vector<std::size_t>> use_idx(c.num_instructions()),
      def_idx(c.num_instructions());
  for (NodeId i = 0; i < c.num_instructions(); ++i) {
    for (Register r : c.uses(i)) use_idx[i].push_back(index_of(regs, r));
    for (Register r : c.defs(i)) def_idx[i].push_back(index_of(regs, r));
  }

  std::vector<std::uint8_t> in(nr);
  solve_backward(c, [&](NodeId i) {
    for (std::size_t r = 0; r < nr; ++r) {
      std::uint8_t any = 0;
      for (NodeId s : c.succ(i))
        if (c.is_instruction(s)) any |= live.at(in_of(s), r);
      live.at(out_of(i), r) = any;
      in[r] = any;
    }
    for (std::size_t r : def_idx[i]) in[r] = 0;
    for (std::size_t r : use_idx[i]) in[r] = 1;
    bool changed = false;
    for (std::size_t r = 0; r < nr; ++r) {
      if (live.at(in_of(i), r) != in[r]) {
        live.at(in_of(i), r) = in[r];
        changed = true;
      }
    }
    return changed;
  });
  return live;
}

DistanceMap distance(const Cfg& c, Threshold w) {
  if (w < 1) throw std::invalid_argument("threshold must be >= 1");
  const auto& regs = c.registers();
  const std::size_t nr = regs.size();
  // Least fixpoint: every unknown starts at the chain bottom, 1.
  DistanceMap dist(c.num_instructions(), nr, Distance::finite(1));

  std::vector<std::vector<bool>> acc(c.num_instructions(),
                                     std::vector<bool>(nr, false));
  for (NodeId i = 0; i < c.num_instructions(); ++i)
    for (std::size_t r = 0; r < nr; ++r) acc[i][r] = c.accesses(i, regs[r]);

  solve_backward(c, [&](NodeId i) {
    bool changed = false;
    for (std::size_t r = 0; r < nr; ++r) {
      Distance out = Distance::finite(1);
      for (NodeId s : c.succ(i))
        out = std::max(out, c.is_instruction(s) ? dist.at(in_of(s), r)
                                                : Distance::inf());
      dist.at(out_of(i), r) = out;
      Distance in = acc[i][r] ? Distance::finite(1) : inc(out, w);
      if (dist.at(in_of(i), r) != in) {
        dist.at(in_of(i), r) = in;
        changed = true;
      }
    }
    return changed;
  });
  return dist;
}

AnalysisResult::AnalysisResult(Cfg cfg, LiveMap live, DistanceMap dist,
                               Threshold w)
    : cfg_(std::move(cfg)), live_(std::move(live)), dist_(std::move(dist)), w_(w) {}

std::optional<std::size_t> AnalysisResult::slot(Register r) const {
  const auto& regs = cfg_.registers();
  std::size_t k = index_of(regs, r);
  if (k == regs.size() || regs[k] != r) return std::nullopt;
  return k;
}

bool AnalysisResult::live(ProgramPoint p, Register r) const {
  auto k = slot(r);
  return k && live_.at(p, *k);
}

Distance AnalysisResult::dist(ProgramPoint p, Register r) const {
  auto k = slot(r);
  return k ? dist_.at(p, *k) : Distance::inf();
}

std::optional<PowerState> AnalysisResult::power(InstrId i, Register r) const {
  if (i >= cfg_.num_instructions() || !cfg_.accesses(i, r)) return std::nullopt;
  return classify(live(out_of(i), r), sleep_off(out_of(i), r));
}

AnalysisResult analyze(const Program& p, Threshold w) {
  Cfg c = build_cfg(p);
  LiveMap live = liveness(c);
  DistanceMap dist = distance(c, w);
  return AnalysisResult(std::move(c), std::move(live), std::move(dist), w);
}

void write_facts_csv(std::ostream& os, const AnalysisResult& a) {
  os << "point,reg,live,dist,power\n";
  for (ProgramPoint pt : program_points(a.cfg())) {
    for (Register r : a.cfg().registers()) {
      os << to_string(pt) << ',' << to_string(r) << ','
         << (a.live(pt, r) ? "true" : "false") << ',' << to_string(a.dist(pt, r))
         << ',';
      if (pt.side == Side::out)
        if (auto s = a.power(pt.instr, r)) os << to_string(*s);
      os << '\n';
    }
  }
}

}  // namespace greener
