#pragma once

#include <cstddef>
#include <mutex>
#include <optional>
#include <string>

namespace stencilstream {

// Capacity-bounded arena standing in for device memory. It only accounts
// bytes; buffers live in ordinary host memory and hold a Reservation for
// their lifetime.
class FastTier {
  public:
    class Reservation {
      public:
        Reservation() = default;
        Reservation(Reservation&& other) noexcept;
        Reservation& operator=(Reservation&& other) noexcept;
        Reservation(const Reservation&) = delete;
        Reservation& operator=(const Reservation&) = delete;
        ~Reservation();

        std::size_t bytes() const { return bytes_; }

      private:
        friend class FastTier;
        Reservation(FastTier* tier, std::size_t bytes) : tier_(tier), bytes_(bytes) {}
        void release() noexcept;

        FastTier* tier_ = nullptr;
        std::size_t bytes_ = 0;
    };

    explicit FastTier(std::optional<std::size_t> capacity = std::nullopt) : capacity_(capacity) {}
    FastTier(const FastTier&) = delete;
    FastTier& operator=(const FastTier&) = delete;

    // Throws Error(capacity) if the allocation would exceed the capacity.
    Reservation reserve(const std::string& name, std::size_t bytes);

    std::optional<std::size_t> capacity() const { return capacity_; }
    std::size_t resident() const;
    std::size_t peak() const;

  private:
    void give_back(std::size_t bytes) noexcept;

    std::optional<std::size_t> capacity_;
    mutable std::mutex mutex_;
    std::size_t resident_ = 0;
    std::size_t peak_ = 0;
};

} // namespace stencilstream
