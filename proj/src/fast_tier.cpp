#include "stencilstream/fast_tier.hpp"

#include "stencilstream/error.hpp"

#include <algorithm>
#include <utility>

namespace stencilstream {

FastTier::Reservation::Reservation(Reservation&& other) noexcept
    : tier_(std::exchange(other.tier_, nullptr)), bytes_(std::exchange(other.bytes_, 0)) {}

FastTier::Reservation& FastTier::Reservation::operator=(Reservation&& other) noexcept {
    if (this != &other) {
        release();
        tier_ = std::exchange(other.tier_, nullptr);
        bytes_ = std::exchange(other.bytes_, 0);
    }
    return *this;
}

FastTier::Reservation::~Reservation() { release(); }

void FastTier::Reservation::release() noexcept {
    if (tier_) tier_->give_back(bytes_);
    tier_ = nullptr;
    bytes_ = 0;
}

FastTier::Reservation FastTier::reserve(const std::string& name, std::size_t bytes) {
    std::lock_guard lock(mutex_);
    if (capacity_ && resident_ + bytes > *capacity_) {
        fail(ErrorKind::capacity, "fast tier cannot hold '" + name + "' (" + std::to_string(bytes) +
                                      " bytes): " + std::to_string(resident_) + " of " +
                                      std::to_string(*capacity_) + " bytes in use");
    }
    resident_ += bytes;
    peak_ = std::max(peak_, resident_);
    return Reservation(this, bytes);
}

std::size_t FastTier::resident() const {
    std::lock_guard lock(mutex_);
    return resident_;
}

std::size_t FastTier::peak() const {
    std::lock_guard lock(mutex_);
    return peak_;
}

void FastTier::give_back(std::size_t bytes) noexcept {
    std::lock_guard lock(mutex_);
    resident_ -= bytes;
}

} // namespace stencilstream
