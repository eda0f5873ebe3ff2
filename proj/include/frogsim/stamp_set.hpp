#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace frogsim {

/// Set over [0, n) with O(1) clear: membership is "stamp equals current epoch".
/// Sized once per graph and reused across replicas.
class StampSet {
public:
    StampSet() = default;
    explicit StampSet(std::size_t n) : stamp_(n, 0) {}

    void resize(std::size_t n) {
        if (stamp_.size() != n) {
            stamp_.assign(n, 0);
            epoch_ = 1;
        }
    }

    void clear() {
        if (++epoch_ == 0) {
            std::fill(stamp_.begin(), stamp_.end(), 0);
            epoch_ = 1;
        }
    }

    /// Returns true when v was not yet a member.
    bool insert(std::size_t v) {
        if (stamp_[v] == epoch_) return false;
        stamp_[v] = epoch_;
        return true;
    }
    bool contains(std::size_t v) const { return stamp_[v] == epoch_; }
    std::size_t universe() const { return stamp_.size(); }

private:
    std::vector<std::uint32_t> stamp_;
    std::uint32_t epoch_ = 1;
};

/// Per-thread scratch sets, keyed by size.
StampSet& scratch_set(std::size_t n, int slot = 0);

}  // namespace frogsim
