#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace scrambench {

inline constexpr std::size_t kControlCount = 22;
inline constexpr std::size_t kCategoryCount = 10;
inline constexpr std::size_t kLevelCount = 4;

/// One of the 22 Ransomware Readiness Index controls. Ordered by
/// (category, sub-letter); the ordinal is the position in the catalog.
class ControlId {
  public:
    static std::optional<ControlId> from_ordinal(std::size_t ordinal);
    /// Accepts "5b", "5B" or a full label such as "5b. Deliver regular training".
    static std::optional<ControlId> parse(std::string_view text);

    constexpr std::size_t ordinal() const noexcept { return ordinal_; }
    int category() const noexcept;     // 1..10
    char sub_letter() const noexcept;  // 'a'..'d'
    std::string code() const;          // "5b"
    std::string_view title() const noexcept;
    std::string label() const;         // "5b. Deliver regular training"

    auto operator<=>(const ControlId &) const = default;

  private:
    explicit constexpr ControlId(std::size_t ordinal) : ordinal_(ordinal) {}
    std::size_t ordinal_ = 0;

    friend const std::array<ControlId, kControlCount> &all_controls();
};

const std::array<ControlId, kControlCount> &all_controls();

std::string_view category_name(int category);

enum class MaturityLevel : int {
    NotImplemented = 0,
    PartiallyImplemented = 1,
    LargelyImplemented = 2,
    FullyImplemented = 3,
};

inline constexpr std::array<MaturityLevel, kLevelCount> kAllLevels = {
    MaturityLevel::NotImplemented, MaturityLevel::PartiallyImplemented,
    MaturityLevel::LargelyImplemented, MaturityLevel::FullyImplemented};

constexpr int level_index(MaturityLevel level) noexcept { return static_cast<int>(level); }

/// Exact thirds: 0, 1/3, 2/3, 1.
constexpr double level_score(MaturityLevel level) noexcept {
    return static_cast<double>(level_index(level)) / 3.0;
}

/// Display percentages: 0, 33, 67, 100.
int level_percent(MaturityLevel level) noexcept;

/// Wire token: "not" | "partial" | "large" | "full".
std::string_view level_token(MaturityLevel level) noexcept;
std::optional<MaturityLevel> parse_level_token(std::string_view token);

/// Display form, e.g. "67%".
std::string display_level(MaturityLevel level);
std::optional<MaturityLevel> parse_display_level(std::string_view text);

} // namespace scrambench
