#include "scrambench/field.hpp"
#include "scrambench/error.hpp"

#include <cstring>

#include <sodium.h>

namespace scrambench {

namespace {

void ensure_sodium() {
    static const bool ready = [] { return sodium_init() >= 0; }();
    if (!ready)
        throw Error(ErrorCode::InvalidInput, "libsodium initialisation failed");
}

} // namespace

std::optional<FieldElement> FieldElement::from_decimal(std::string_view text) {
    if (text.empty() || text.size() > 19)
        return std::nullopt;
    std::uint64_t v = 0;
    for (char c : text) {
        if (c < '0' || c > '9')
            return std::nullopt;
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    if (v >= kModulus)
        return std::nullopt;
    return FieldElement(v);
}

SystemRng::SystemRng() { ensure_sodium(); }

std::uint64_t SystemRng::next_u64() {
    std::uint64_t v = 0;
    randombytes_buf(&v, sizeof(v));
    return v;
}

SeededRng::SeededRng(std::uint64_t seed) {
    ensure_sodium();
    unsigned char seed_bytes[8];
    for (int i = 0; i < 8; ++i)
        seed_bytes[i] = static_cast<unsigned char>(seed >> (8 * i));
    crypto_generichash(key_, sizeof(key_), seed_bytes, sizeof(seed_bytes), nullptr, 0);
}

void SeededRng::refill() {
    static const unsigned char zeros[64] = {};
    static const unsigned char nonce[crypto_stream_chacha20_NONCEBYTES] = {};
    crypto_stream_chacha20_xor_ic(block_, zeros, sizeof(block_), nonce, counter_++, key_);
    used_ = 0;
}

std::uint64_t SeededRng::next_u64() {
    if (used_ + 8 > sizeof(block_))
        refill();
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(block_[used_ + i]) << (8 * i);
    used_ += 8;
    return v;
}

FieldElement uniform_field_element(ShareRng &rng) {
    for (;;) {
        const std::uint64_t candidate = rng.next_u64() & FieldElement::kModulus;
        if (candidate < FieldElement::kModulus)
            return FieldElement::reduce(candidate);
    }
}

} // namespace scrambench
