#include "scrambench/catalog.hpp"

#include <algorithm>
#include <cctype>

namespace scrambench {

namespace {

struct CatalogEntry {
    int category;
    char letter;
    std::string_view title;
};

constexpr std::array<CatalogEntry, kControlCount> kCatalog = {{
    {1, 'a', "Deploy multi-factor authentication across the enterprise"},
    {2, 'a', "Deploy an endpoint detection and response (EDR) system / host-based IPS agent"},
    {2, 'b', "Hunt for malicious activity"},
    {3, 'a', "Encrypt data in transit"},
    {3, 'b', "Encrypt data at rest"},
    {4, 'a', "Remove barriers to sharing threat intelligence"},
    {4, 'b', "Receive external threat intelligence"},
    {5, 'a', "Evaluate employee skills"},
    {5, 'b', "Deliver regular training"},
    {6, 'a', "Perform regular backups of systems"},
    {6, 'b', "Test backup data"},
    {6, 'c', "Protect backups"},
    {6, 'd', "Store backups in offline location"},
    {7, 'a', "Deploy updates and patches in a timely manner"},
    {7, 'b', "Implement a centralized patch management system"},
    {7, 'c', "Apply patches using a risk-based approach"},
    {8, 'a', "Codify an incident response plan"},
    {8, 'b', "Test your incident response plan"},
    {8, 'c', "Maintain your incident response plan"},
    {9, 'a', "Establish an external penetration testing program"},
    {9, 'b', "Perform red team exercises"},
    {10, 'a', "Adopt network segmentation to ensure isolation of critical systems in an attack"},
}};

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "Multifactor Authentication", "Endpoint Detection and Response", "Encryption",
    "Empowerment", "Training", "Backup", "Patching", "Incident response",
    "Checking the work", "Segmenting"};

constexpr std::array<std::string_view, kLevelCount> kLevelTokens = {"not", "partial", "large",
                                                                    "full"};
constexpr std::array<int, kLevelCount> kLevelPercents = {0, 33, 67, 100};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

} // namespace

std::optional<ControlId> ControlId::from_ordinal(std::size_t ordinal) {
    if (ordinal >= kControlCount)
        return std::nullopt;
    return all_controls()[ordinal];
}

std::optional<ControlId> ControlId::parse(std::string_view text) {
    text = trim(text);
    std::size_t digits = 0;
    while (digits < text.size() && std::isdigit(static_cast<unsigned char>(text[digits])))
        ++digits;
    if (digits == 0 || digits > 2 || digits >= text.size())
        return std::nullopt;
    int category = 0;
    for (std::size_t i = 0; i < digits; ++i)
        category = category * 10 + (text[i] - '0');
    const char letter = static_cast<char>(std::tolower(static_cast<unsigned char>(text[digits])));
    // Anything after the letter must be a label separator, not more identifier.
    if (digits + 1 < text.size()) {
        const char next = text[digits + 1];
        if (std::isalnum(static_cast<unsigned char>(next)))
            return std::nullopt;
    }
    for (std::size_t i = 0; i < kControlCount; ++i)
        if (kCatalog[i].category == category && kCatalog[i].letter == letter)
            return all_controls()[i];
    return std::nullopt;
}

int ControlId::category() const noexcept { return kCatalog[ordinal_].category; }

char ControlId::sub_letter() const noexcept { return kCatalog[ordinal_].letter; }

std::string ControlId::code() const {
    return std::to_string(category()) + std::string(1, sub_letter());
}

std::string_view ControlId::title() const noexcept { return kCatalog[ordinal_].title; }

std::string ControlId::label() const { return code() + ". " + std::string(title()); }

const std::array<ControlId, kControlCount> &all_controls() {
    static const std::array<ControlId, kControlCount> controls = [] {
        std::array<ControlId, kControlCount> out{
            ControlId(0),  ControlId(1),  ControlId(2),  ControlId(3),  ControlId(4),
            ControlId(5),  ControlId(6),  ControlId(7),  ControlId(8),  ControlId(9),
            ControlId(10), ControlId(11), ControlId(12), ControlId(13), ControlId(14),
            ControlId(15), ControlId(16), ControlId(17), ControlId(18), ControlId(19),
            ControlId(20), ControlId(21)};
        return out;
    }();
    return controls;
}

std::string_view category_name(int category) {
    if (category < 1 || category > static_cast<int>(kCategoryCount))
        return {};
    return kCategoryNames[static_cast<std::size_t>(category - 1)];
}

int level_percent(MaturityLevel level) noexcept {
    return kLevelPercents[static_cast<std::size_t>(level_index(level))];
}

std::string_view level_token(MaturityLevel level) noexcept {
    return kLevelTokens[static_cast<std::size_t>(level_index(level))];
}

std::optional<MaturityLevel> parse_level_token(std::string_view token) {
    token = trim(token);
    for (MaturityLevel level : kAllLevels)
        if (level_token(level) == token)
            return level;
    return std::nullopt;
}

std::string display_level(MaturityLevel level) {
    return std::to_string(level_percent(level)) + "%";
}

std::optional<MaturityLevel> parse_display_level(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.back() == '%')
        text.remove_suffix(1);
    for (MaturityLevel level : kAllLevels)
        if (std::to_string(level_percent(level)) == text)
            return level;
    return std::nullopt;
}

} // namespace scrambench
