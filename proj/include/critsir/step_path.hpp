#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace critsir {

// Semantic tag for a StepPath. Conventions used throughout:
//   walk:       values[k] is the walk value after k+1 steps; the origin 0 is
//               implicit and not stored
//   profile:    values[h] is the level count at height h, starting at h = 0
//   cumulative: values[h] is the running sum of a profile through height h
//   height:     values[k] is the depth associated with exploration step k
enum class PathKind { walk, profile, cumulative, height };

// A finite real-valued sequence on a uniform grid. dt is the time per index
// step (1 for discrete walks). time_scale and space_scale record rescaling
// factors that have already been applied, for provenance; meta is a free-form
// tag (e.g. which sampling route produced an excursion).
struct StepPath {
    std::vector<double> values;
    PathKind kind = PathKind::walk;
    double dt = 1.0;
    double time_scale = 1.0;
    double space_scale = 1.0;
    std::string meta;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    bool empty() const { return values.empty(); }
};

// Paired exploration labels (l, r) with l < r, one pair per backedge. The
// rescaled coordinates are filled in only when a scaling has been applied.
struct MarkSet {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
    std::vector<std::pair<double, double>> rescaled;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
};

} // namespace critsir
