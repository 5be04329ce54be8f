#ifndef TEMPONET_TENSOR_HPP
#define TEMPONET_TENSOR_HPP

// Sparse symmetric node x node x time count tensor.
//
// Entries are stored once per unordered pair under the canonical key
// (min(i,j), max(i,j), t). Reads are mirrored, so at(i, j, t) == at(j, i, t).
// "Ordered" sums below run over all (i, j) including both mirrors, which is the
// convention of the dense |V| x |V| x T array the tensor represents.

#include "temponet/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace temponet {

struct EdgeEvent {
    int src = 0;
    int dst = 0;
    int t = 0;
    double weight = 1.0;
};

// One stored cell; i <= j always.
struct TensorEntry {
    int i = 0;
    int j = 0;
    int t = 0;
    double value = 0.0;

    bool is_diagonal() const { return i == j; }
    // Number of cells of the dense array this entry stands for.
    double multiplicity() const { return i == j ? 1.0 : 2.0; }
};

class DynTensor {
  public:
    DynTensor() = default;

    DynTensor(int node_count, int horizon, bool self_loops_allowed)
        : node_count_(node_count), horizon_(horizon), self_loops_(self_loops_allowed),
          source_horizon_(horizon) {
        if (node_count < 0) throw InvalidArgument("node_count must be non-negative");
        if (horizon < 0) throw InvalidArgument("horizon must be non-negative");
        slice_begin_.assign(static_cast<std::size_t>(horizon) + 1, 0);
    }

    // Builds from canonical (i <= j) cells; duplicate keys are summed and zeros dropped.
    static DynTensor from_cells(int node_count, int horizon, bool self_loops_allowed,
                                std::vector<TensorEntry> cells, int granularity = 1,
                                int source_horizon = -1) {
        DynTensor out(node_count, horizon, self_loops_allowed);
        out.granularity_ = granularity;
        out.source_horizon_ = source_horizon < 0 ? horizon : source_horizon;
        for (auto& c : cells) {
            if (c.i > c.j) std::swap(c.i, c.j);
            if (c.i < 0 || c.j >= node_count || c.t < 0 || c.t >= horizon)
                throw InvalidArgument("tensor cell (" + std::to_string(c.i) + "," + std::to_string(c.j) +
                                      "," + std::to_string(c.t) + ") out of bounds");
            if (!(c.value >= 0.0) || !std::isfinite(c.value))
                throw InvalidArgument("tensor cell values must be finite and non-negative");
            if (!self_loops_allowed && c.i == c.j && c.value > 0.0)
                throw InvalidArgument("self-loop cell (" + std::to_string(c.i) + "," + std::to_string(c.j) +
                                      "," + std::to_string(c.t) + ") in a tensor without self-loops");
        }
        std::sort(cells.begin(), cells.end(), [](const TensorEntry& a, const TensorEntry& b) {
            return std::tie(a.t, a.i, a.j) < std::tie(b.t, b.i, b.j);
        });
        std::vector<TensorEntry> merged;
        merged.reserve(cells.size());
        for (const auto& c : cells) {
            if (!merged.empty() && merged.back().t == c.t && merged.back().i == c.i && merged.back().j == c.j)
                merged.back().value += c.value;
            else
                merged.push_back(c);
        }
        std::erase_if(merged, [](const TensorEntry& e) { return e.value == 0.0; });
        out.entries_ = std::move(merged);
        out.rebuild_slices();
        return out;
    }

    int node_count() const { return node_count_; }
    int horizon() const { return horizon_; }
    bool self_loops_allowed() const { return self_loops_; }
    // Number of original time steps aggregated into one step (1 when not aggregated).
    int granularity() const { return granularity_; }
    // Horizon of the finest-granularity tensor this one was aggregated from.
    int source_horizon() const { return source_horizon_; }
    // Width of the final window; shorter than granularity() when it does not divide source_horizon().
    int last_window_width() const {
        if (horizon_ == 0) return 0;
        return source_horizon_ - (horizon_ - 1) * granularity_;
    }

    std::span<const TensorEntry> entries() const { return entries_; }
    std::size_t nnz() const { return entries_.size(); }

    std::span<const TensorEntry> slice(int t) const {
        if (t < 0 || t >= horizon_) throw InvalidArgument("time index " + std::to_string(t) + " out of range");
        return std::span<const TensorEntry>(entries_).subspan(slice_begin_[t], slice_begin_[t + 1] - slice_begin_[t]);
    }

    double at(int i, int j, int t) const {
        if (i < 0 || j < 0 || i >= node_count_ || j >= node_count_ || t < 0 || t >= horizon_)
            throw InvalidArgument("index (" + std::to_string(i) + "," + std::to_string(j) + "," +
                                  std::to_string(t) + ") out of range");
        if (i > j) std::swap(i, j);
        auto s = slice(t);
        auto it = std::lower_bound(s.begin(), s.end(), std::pair{i, j}, [](const TensorEntry& e, std::pair<int, int> key) {
            return std::tie(e.i, e.j) < std::tie(key.first, key.second);
        });
        if (it != s.end() && it->i == i && it->j == j) return it->value;
        return 0.0;
    }

    // Sum over all ordered cells.
    double total_mass() const {
        double s = 0.0;
        for (const auto& e : entries_) s += e.multiplicity() * e.value;
        return s;
    }

    // Squared Frobenius norm over all ordered cells.
    double squared_norm() const {
        double s = 0.0;
        for (const auto& e : entries_) s += e.multiplicity() * e.value * e.value;
        return s;
    }

    bool is_zero() const { return entries_.empty(); }

    friend bool operator==(const DynTensor& a, const DynTensor& b) {
        if (a.node_count_ != b.node_count_ || a.horizon_ != b.horizon_ || a.self_loops_ != b.self_loops_ ||
            a.entries_.size() != b.entries_.size())
            return false;
        for (std::size_t k = 0; k < a.entries_.size(); ++k) {
            const auto& x = a.entries_[k];
            const auto& y = b.entries_[k];
            if (x.i != y.i || x.j != y.j || x.t != y.t || x.value != y.value) return false;
        }
        return true;
    }

  private:
    void rebuild_slices() {
        slice_begin_.assign(static_cast<std::size_t>(horizon_) + 1, 0);
        for (const auto& e : entries_) ++slice_begin_[e.t + 1];
        for (int t = 0; t < horizon_; ++t) slice_begin_[t + 1] += slice_begin_[t];
    }

    int node_count_ = 0;
    int horizon_ = 0;
    bool self_loops_ = false;
    int granularity_ = 1;
    int source_horizon_ = 0;
    std::vector<TensorEntry> entries_;
    std::vector<std::size_t> slice_begin_;
};

inline DynTensor from_edge_events(std::span<const EdgeEvent> events, int node_count, int horizon,
                                  bool self_loops_allowed) {
    if (node_count < 0 || horizon < 0) throw InvalidArgument("node_count and horizon must be non-negative");
    std::vector<TensorEntry> cells;
    cells.reserve(events.size());
    for (std::size_t k = 0; k < events.size(); ++k) {
        const auto& ev = events[k];
        auto describe = [&] {
            return "event #" + std::to_string(k) + " (src=" + std::to_string(ev.src) + ", dst=" + std::to_string(ev.dst) +
                   ", t=" + std::to_string(ev.t) + ")";
        };
        if (ev.src < 0 || ev.src >= node_count || ev.dst < 0 || ev.dst >= node_count)
            throw InvalidArgument(describe() + ": node id outside [0, " + std::to_string(node_count) + ")");
        if (ev.t < 0 || ev.t >= horizon)
            throw InvalidArgument(describe() + ": time step outside [0, " + std::to_string(horizon) + ")");
        if (!(ev.weight >= 0.0) || !std::isfinite(ev.weight))
            throw InvalidArgument(describe() + ": weight must be finite and non-negative");
        if (!self_loops_allowed && ev.src == ev.dst) throw InvalidArgument(describe() + ": self-loop not allowed");
        cells.push_back({std::min(ev.src, ev.dst), std::max(ev.src, ev.dst), ev.t, ev.weight});
    }
    return DynTensor::from_cells(node_count, horizon, self_loops_allowed, std::move(cells));
}

// Sums disjoint half-open windows [t'w, (t'+1)w); a trailing partial window is kept.
inline DynTensor aggregate_granularity(const DynTensor& x, int w) {
    if (w <= 0) throw InvalidArgument("granularity must be a positive integer, got " + std::to_string(w));
    if (w == 1) return x;
    const int horizon = (x.horizon() + w - 1) / w;
    std::vector<TensorEntry> cells;
    cells.reserve(x.nnz());
    for (const auto& e : x.entries()) cells.push_back({e.i, e.j, e.t / w, e.value});
    return DynTensor::from_cells(x.node_count(), horizon, x.self_loops_allowed(), std::move(cells),
                                 x.granularity() * w, x.source_horizon());
}

// Fraction of admissible unordered pairs with at least one edge at t.
inline double snapshot_density(const DynTensor& x, int t) {
    if (t < 0 || t >= x.horizon())
        throw InvalidArgument("snapshot " + std::to_string(t) + " outside [0, " + std::to_string(x.horizon()) + ")");
    const double n = x.node_count();
    const double admissible = x.self_loops_allowed() ? n * (n + 1) / 2.0 : n * (n - 1) / 2.0;
    if (admissible <= 0.0) return 0.0;
    double present = 0.0;
    for (const auto& e : x.slice(t))
        if (e.value > 0.0) present += 1.0;
    return present / admissible;
}

// Element t is sum_{i,j} X_ijt / |V|^2 over ordered pairs.
inline std::vector<double> empirical_rate_series(const DynTensor& x) {
    std::vector<double> out(static_cast<std::size_t>(x.horizon()), 0.0);
    if (x.node_count() == 0) return out;
    const double n2 = static_cast<double>(x.node_count()) * x.node_count();
    for (const auto& e : x.entries()) out[e.t] += e.multiplicity() * e.value;
    for (auto& v : out) v /= n2;
    return out;
}

} // namespace temponet

#endif // TEMPONET_TENSOR_HPP
