#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace scrambench {

/// Element of GF(p) with p = 2^61 - 1.
class FieldElement {
  public:
    static constexpr std::uint64_t kModulus = (std::uint64_t{1} << 61) - 1;

    constexpr FieldElement() = default;

    /// Reduces any 64-bit value mod p.
    static constexpr FieldElement reduce(std::uint64_t v) noexcept {
        v = (v & kModulus) + (v >> 61);
        if (v >= kModulus)
            v -= kModulus;
        return FieldElement(v);
    }

    constexpr std::uint64_t value() const noexcept { return value_; }

    friend constexpr FieldElement operator+(FieldElement a, FieldElement b) noexcept {
        std::uint64_t s = a.value_ + b.value_;
        if (s >= kModulus)
            s -= kModulus;
        return FieldElement(s);
    }
    friend constexpr FieldElement operator-(FieldElement a, FieldElement b) noexcept {
        return FieldElement(a.value_ >= b.value_ ? a.value_ - b.value_
                                                 : a.value_ + kModulus - b.value_);
    }
    constexpr FieldElement &operator+=(FieldElement o) noexcept { return *this = *this + o; }

    friend constexpr bool operator==(FieldElement, FieldElement) = default;

    std::string to_decimal() const { return std::to_string(value_); }
    /// Strict parse: digits only, value < p.
    static std::optional<FieldElement> from_decimal(std::string_view text);

  private:
    explicit constexpr FieldElement(std::uint64_t v) : value_(v) {}
    std::uint64_t value_ = 0;
};

/// Randomness source for share generation.
class ShareRng {
  public:
    virtual ~ShareRng() = default;
    virtual std::uint64_t next_u64() = 0;
};

/// Operating-system CSPRNG (libsodium).
class SystemRng final : public ShareRng {
  public:
    SystemRng();
    std::uint64_t next_u64() override;
};

/// Deterministic ChaCha20 keystream keyed from a 64-bit seed. For tests and
/// reproducible demo runs only.
class SeededRng final : public ShareRng {
  public:
    explicit SeededRng(std::uint64_t seed);
    std::uint64_t next_u64() override;

  private:
    void refill();

    unsigned char key_[32]{};
    unsigned char block_[64]{};
    std::uint64_t counter_ = 0;
    std::size_t used_ = sizeof(block_);
};

/// Uniform draw from [0, p) by rejection on the low 61 bits.
FieldElement uniform_field_element(ShareRng &rng);

} // namespace scrambench
