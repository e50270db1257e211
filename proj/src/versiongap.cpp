#include "postprice/versiongap.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "postprice/error.hpp"

namespace postprice {

FeasibleFamily FeasibleFamily::explicit_subsets(std::vector<std::uint32_t> masks) {
  FeasibleFamily f;
  f.kind_ = Kind::kExplicit;
  std::sort(masks.begin(), masks.end());
  masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
  f.masks_ = std::move(masks);
  return f;
}

FeasibleFamily FeasibleFamily::at_most_one() { return FeasibleFamily{}; }

FeasibleFamily FeasibleFamily::antichains(std::vector<int> parent) {
  for (std::size_t b = 0; b < parent.size(); ++b) {
    if (parent[b] >= static_cast<int>(b) || parent[b] < -1) {
      throw std::invalid_argument("antichain family needs parents listed before children");
    }
  }
  FeasibleFamily f;
  f.kind_ = Kind::kAntichains;
  f.parent_ = std::move(parent);
  return f;
}

bool FeasibleFamily::contains(std::uint32_t mask) const {
  switch (kind_) {
    case Kind::kExplicit:
      return std::binary_search(masks_.begin(), masks_.end(), mask);
    case Kind::kAtMostOne:
      return (mask & (mask - 1)) == 0;
    case Kind::kAntichains:
      for (std::size_t b = 0; b < parent_.size(); ++b) {
        if (!(mask >> b & 1)) continue;
        for (int a = parent_[b]; a >= 0; a = parent_[static_cast<std::size_t>(a)]) {
          if (mask >> a & 1) return false;
        }
      }
      return mask >> parent_.size() == 0;
  }
  return false;
}

std::vector<std::uint32_t> FeasibleFamily::materialize(std::size_t bins) const {
  if (bins > 32) throw std::invalid_argument("at most 32 bins");
  std::vector<std::uint32_t> out;
  switch (kind_) {
    case Kind::kExplicit:
      for (auto m : masks_) {
        if (bins == 32 || m >> bins == 0) out.push_back(m);
      }
      break;
    case Kind::kAtMostOne:
      out.push_back(0);
      for (std::size_t b = 0; b < bins; ++b) out.push_back(std::uint32_t{1} << b);
      break;
    case Kind::kAntichains: {
      if (parent_.size() != bins) throw std::invalid_argument("antichain family size mismatch");
      if (bins > 24) throw BudgetExceeded("too many bins to list antichains");
      for (std::uint32_t m = 0; m < (std::uint32_t{1} << bins); ++m) {
        if (contains(m)) out.push_back(m);
      }
      break;
    }
  }
  return out;
}

void validate(const VgInstance& vg) {
  if (vg.granularity < 2) throw std::invalid_argument("granularity M must be at least 2");
  if (vg.bins.size() > 32) throw std::invalid_argument("at most 32 bins");
  if (!vg.family.contains(0)) throw std::invalid_argument("feasible family must contain the empty set");
  for (const auto& bin : vg.bins) {
    if (bin.capacity_units < 0 || bin.capacity_units > vg.granularity) {
      throw std::invalid_argument("bin capacity outside [0, 1]");
    }
    if (bin.discount < 0 || bin.discount > 1) throw std::invalid_argument("discount outside [0, 1]");
    if (bin.single_object && bin.min_size_units < 1) {
      throw std::invalid_argument("single-object bins need a positive minimum size");
    }
  }
  for (const auto& obj : vg.objects) {
    for (const auto& v : obj.versions) {
      if (v.size_units < 0 || v.size_units > vg.granularity) {
        throw std::invalid_argument("version size outside [0, 1]");
      }
      if (v.profit < 0) throw std::invalid_argument("negative profit");
    }
  }
}

bool is_feasible(const VgInstance& vg, const VgAssignment& assignment) {
  std::map<std::size_t, std::uint32_t> bins_of;
  std::vector<long long> used(vg.bins.size(), 0);
  std::vector<int> occupants(vg.bins.size(), 0);
  for (const auto& p : assignment.placements) {
    if (p.object >= vg.objects.size() || p.bin >= vg.bins.size()) return false;
    if (p.version >= vg.objects[p.object].versions.size()) return false;
    auto& mask = bins_of[p.object];
    if (mask >> p.bin & 1) return false;  // two versions in one bin
    mask |= std::uint32_t{1} << p.bin;
    const auto size = vg.objects[p.object].versions[p.version].size_units;
    const auto& bin = vg.bins[p.bin];
    if (bin.single_object && size < bin.min_size_units) return false;
    used[p.bin] += size;
    ++occupants[p.bin];
  }
  for (const auto& [object, mask] : bins_of) {
    if (!vg.family.contains(mask)) return false;
  }
  for (std::size_t b = 0; b < vg.bins.size(); ++b) {
    if (used[b] > vg.bins[b].capacity_units) return false;
    if (vg.bins[b].single_object && occupants[b] > 1) return false;
  }
  return true;
}

Rational assignment_profit(const VgInstance& vg, const VgAssignment& assignment) {
  Rational total = 0;
  for (const auto& p : assignment.placements) {
    total += vg.bins[p.bin].discount * vg.objects[p.object].versions[p.version].profit;
  }
  return total;
}

namespace {

// One way to place an object: a feasible bin set and a version per bin.
struct Choice {
  std::vector<std::pair<std::size_t, std::size_t>> placements;  // (bin, version)
  Rational gain;
  std::uint64_t key_delta = 0;
};

std::vector<Choice> choices_for(const VgInstance& vg, const VgObject& obj,
                                const std::vector<std::uint32_t>& masks,
                                const std::vector<std::uint64_t>& stride) {
  std::vector<Choice> out;
  for (auto mask : masks) {
    std::vector<std::size_t> bins;
    for (std::size_t b = 0; b < vg.bins.size(); ++b) {
      if (mask >> b & 1) bins.push_back(b);
    }
    if (!bins.empty() && obj.versions.empty()) continue;
    // Odometer over the versions placed in each bin of the mask.
    std::vector<std::size_t> pick(bins.size(), 0);
    while (true) {
      Choice c;
      bool ok = true;
      for (std::size_t k = 0; k < bins.size() && ok; ++k) {
        const auto& bin = vg.bins[bins[k]];
        const auto& v = obj.versions[pick[k]];
        if (v.size_units > bin.capacity_units) ok = false;
        if (bin.single_object && v.size_units < bin.min_size_units) ok = false;
        c.placements.emplace_back(bins[k], pick[k]);
        c.gain += bin.discount * v.profit;
        c.key_delta += static_cast<std::uint64_t>(v.size_units) * stride[bins[k]];
      }
      if (ok) out.push_back(std::move(c));
      std::size_t k = 0;
      while (k < bins.size() && ++pick[k] == obj.versions.size()) pick[k++] = 0;
      if (k == bins.size()) break;
    }
  }
  return out;
}

}  // namespace

VgSolution solve_versiongap(const VgInstance& vg, const VgBudget& budget) {
  validate(vg);
  const std::size_t bins = vg.bins.size();

  // Mixed-radix encoding of the per-bin consumed capacity.
  std::vector<std::uint64_t> stride(bins);
  std::uint64_t span = 1;
  for (std::size_t b = 0; b < bins; ++b) {
    stride[b] = span;
    const auto radix = static_cast<std::uint64_t>(vg.bins[b].capacity_units) + 1;
    if (span > std::numeric_limits<std::uint64_t>::max() / radix) {
      throw BudgetExceeded("VersionGAP capacity table does not fit in 64-bit keys");
    }
    span *= radix;
  }
  auto used_in = [&](std::uint64_t key, std::size_t b) {
    return static_cast<long long>(key / stride[b] %
                                  (static_cast<std::uint64_t>(vg.bins[b].capacity_units) + 1));
  };

  const auto masks = vg.family.materialize(bins);

  struct Entry {
    std::uint64_t key;
    Rational profit;
    std::uint32_t parent;
    std::uint32_t choice;
  };
  std::vector<std::vector<Entry>> layers(1);
  layers[0].push_back(Entry{0, Rational(0), 0, 0});
  std::vector<std::vector<Choice>> all_choices;
  std::uint64_t total_states = 1;

  for (const auto& obj : vg.objects) {
    auto choices = choices_for(vg, obj, masks, stride);
    const auto& prev = layers.back();
    std::vector<Entry> next;
    std::unordered_map<std::uint64_t, std::uint32_t> where;
    for (std::uint32_t e = 0; e < prev.size(); ++e) {
      const auto& from = prev[e];
      for (std::uint32_t c = 0; c < choices.size(); ++c) {
        const auto& choice = choices[c];
        bool fits = true;
        for (const auto& [b, v] : choice.placements) {
          const auto used = used_in(from.key, b);
          const auto& bin = vg.bins[b];
          if (bin.single_object && used > 0) fits = false;
          if (used + obj.versions[v].size_units > bin.capacity_units) fits = false;
          if (!fits) break;
        }
        if (!fits) continue;
        const std::uint64_t key = from.key + choice.key_delta;
        Rational profit = from.profit + choice.gain;
        auto [it, inserted] = where.try_emplace(key, static_cast<std::uint32_t>(next.size()));
        if (inserted) {
          next.push_back(Entry{key, std::move(profit), e, c});
          if (++total_states > budget.max_states) {
            throw BudgetExceeded("VersionGAP state count above budget (" +
                                 std::to_string(budget.max_states) + ")");
          }
        } else if (profit > next[it->second].profit) {
          next[it->second] = Entry{key, std::move(profit), e, c};
        }
      }
    }
    layers.push_back(std::move(next));
    all_choices.push_back(std::move(choices));
  }

  const auto& last = layers.back();
  std::uint32_t best = 0;
  for (std::uint32_t e = 1; e < last.size(); ++e) {
    if (last[e].profit > last[best].profit) best = e;
  }
  VgSolution sol;
  sol.profit = last[best].profit;
  std::uint32_t at = best;
  for (std::size_t i = vg.objects.size(); i-- > 0;) {
    const auto& entry = layers[i + 1][at];
    for (const auto& [b, v] : all_choices[i][entry.choice].placements) {
      sol.assignment.placements.push_back(VgPlacement{i, v, b});
    }
    at = entry.parent;
  }
  std::sort(sol.assignment.placements.begin(), sol.assignment.placements.end());
  return sol;
}

VgSolution brute_versiongap(const VgInstance& vg, const VgBudget& budget) {
  validate(vg);
  const std::size_t bins = vg.bins.size();
  if (bins > 16) throw BudgetExceeded("brute force VersionGAP limited to 16 bins");

  // Per object: every assignment of (no version | version j) to each bin
  // whose bin set is in the family.
  using Placement = std::vector<std::pair<std::size_t, std::size_t>>;  // (bin, version)
  std::vector<std::vector<Placement>> options(vg.objects.size());
  long double count = 1;
  for (std::size_t i = 0; i < vg.objects.size(); ++i) {
    const auto versions = vg.objects[i].versions.size();
    std::vector<std::size_t> digit(bins, 0);  // 0 = absent, j+1 = version j
    while (true) {
      std::uint32_t mask = 0;
      Placement p;
      for (std::size_t b = 0; b < bins; ++b) {
        if (digit[b] > 0) {
          mask |= std::uint32_t{1} << b;
          p.emplace_back(b, digit[b] - 1);
        }
      }
      if (vg.family.contains(mask)) options[i].push_back(std::move(p));
      std::size_t b = 0;
      while (b < bins && ++digit[b] == versions + 1) digit[b++] = 0;
      if (b == bins) break;
    }
    count *= static_cast<long double>(options[i].size());
    if (count > static_cast<long double>(budget.max_enumeration)) {
      throw BudgetExceeded("brute force VersionGAP enumeration above budget");
    }
  }

  VgSolution best;
  best.profit = -1;
  std::vector<std::size_t> pick(vg.objects.size(), 0);
  std::vector<long long> used(bins, 0);
  std::vector<int> occupants(bins, 0);

  auto search = [&](auto&& self, std::size_t i, const Rational& profit) -> void {
    if (i == vg.objects.size()) {
      if (profit > best.profit) {
        best.profit = profit;
        best.assignment.placements.clear();
        for (std::size_t o = 0; o < pick.size(); ++o) {
          for (const auto& [b, v] : options[o][pick[o]]) {
            best.assignment.placements.push_back(VgPlacement{o, v, b});
          }
        }
      }
      return;
    }
    for (std::size_t k = 0; k < options[i].size(); ++k) {
      bool ok = true;
      Rational gain = 0;
      for (const auto& [b, v] : options[i][k]) {
        const auto size = vg.objects[i].versions[v].size_units;
        const auto& bin = vg.bins[b];
        used[b] += size;
        ++occupants[b];
        if (used[b] > bin.capacity_units) ok = false;
        if (bin.single_object && (occupants[b] > 1 || size < bin.min_size_units)) ok = false;
        gain += bin.discount * vg.objects[i].versions[v].profit;
      }
      if (ok) {
        pick[i] = k;
        self(self, i + 1, profit + gain);
      }
      for (const auto& [b, v] : options[i][k]) {
        used[b] -= vg.objects[i].versions[v].size_units;
        --occupants[b];
      }
    }
  };
  search(search, 0, Rational(0));
  std::sort(best.assignment.placements.begin(), best.assignment.placements.end());
  return best;
}

}  // namespace postprice
