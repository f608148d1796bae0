#include "greener/annotator.hpp"

#include <algorithm>
#include <stdexcept>

namespace greener {

Program annotate(const Program& p, const AnalysisResult& a) {
  Program out = p;
  for (auto& ins : out.instructions) {
    ins.power_list.reset();
    auto slots = encodable_slots(ins);
    if (slots.empty()) continue;
    std::vector<PowerState> states;
    states.reserve(slots.size());
    for (Register r : slots) {
      auto s = a.power(ins.id, r);
      if (!s)
        throw std::logic_error("no power fact for " + to_string(r) +
                               " at instruction " + std::to_string(ins.id));
      states.push_back(*s);
    }
    ins.power_list = std::move(states);
  }
  return out;
}

std::vector<Register> unencoded_accesses(const Instruction& i) {
  auto slots = encodable_slots(i);
  std::vector<Register> out;
  for (Register r : register_accesses(i))
    if (std::find(slots.begin(), slots.end(), r) == slots.end()) out.push_back(r);
  return out;
}

bool is_annotated(const Program& p) {
  return std::all_of(p.instructions.begin(), p.instructions.end(),
                     [](const Instruction& i) {
                       return i.power_list || encodable_slots(i).empty();
                     });
}

}  // namespace greener
