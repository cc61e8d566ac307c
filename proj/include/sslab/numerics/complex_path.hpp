#ifndef SSLAB_NUMERICS_COMPLEX_PATH_HPP
#define SSLAB_NUMERICS_COMPLEX_PATH_HPP

#include "sslab/numerics/precision.hpp"

#include <functional>
#include <vector>

namespace sslab {

enum class Tail { none, at_start, at_end };

/// Polygonal path in the complex plane. A tail means the path continues to complex
/// infinity: before the first node (arriving from direction tail_dir) or after the
/// last node (leaving along tail_dir). tail_dir points away from the path, toward infinity.
template <class R>
struct ComplexPath {
    std::vector<cplx<R>> nodes;
    Tail tail = Tail::none;
    cplx<R> tail_dir{};

    static ComplexPath from_nodes(std::vector<cplx<R>> pts, Tail tail = Tail::none) {
        ComplexPath p;
        p.nodes = std::move(pts);
        p.tail = tail;
        p.validate_nodes();
        if (tail == Tail::at_start) {
            cplx<R> d = p.nodes[0] - p.nodes[1];
            p.tail_dir = d / std::abs(d);
        } else if (tail == Tail::at_end) {
            auto n = p.nodes.size();
            cplx<R> d = p.nodes[n - 1] - p.nodes[n - 2];
            p.tail_dir = d / std::abs(d);
        }
        return p;
    }

    /// Path that comes from infinity along direction dir (unit) and ends at end.
    static ComplexPath tail_into(const cplx<R>& end, const cplx<R>& dir) {
        ComplexPath p;
        p.nodes = {end};
        p.tail = Tail::at_start;
        p.tail_dir = dir / std::abs(dir);
        return p;
    }

    void validate_nodes() const {
        if (nodes.empty()) throw ConfigError("path has no nodes");
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (nodes[i] == nodes[i - 1]) throw ConfigError("path has repeated consecutive nodes");
    }

    bool inside(const std::function<bool(const cplx<R>&)>& member) const {
        for (const auto& z : nodes)
            if (!member(z)) return false;
        return true;
    }
};

}  // namespace sslab

#endif
