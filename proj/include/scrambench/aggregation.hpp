#pragma once

// Additive secret sharing of questionnaire statistics across M aggregation
// servers. Each participant encodes its answers into a fixed slot vector,
// splits every slot into M shares that sum to the value mod p, and sends one
// share bundle to each server. Servers only ever add bundles; the plaintext
// totals appear when all M partial sums are combined.

#include "scrambench/catalog.hpp"
#include "scrambench/field.hpp"
#include "scrambench/response.hpp"

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace scrambench {

enum class LossBucket : int {
    From1kTo50k = 0,
    From50kTo100k = 1,
    From100kTo500k = 2,
    From500k = 3,
};

inline constexpr std::size_t kLossBucketCount = 4;
inline constexpr std::array<LossBucket, kLossBucketCount> kAllLossBuckets = {
    LossBucket::From1kTo50k, LossBucket::From50kTo100k, LossBucket::From100kTo500k,
    LossBucket::From500k};

std::string_view loss_bucket_label(LossBucket bucket) noexcept;
std::uint64_t loss_bucket_lower(LossBucket bucket) noexcept;
/// Exclusive upper bound; 0 for the open top bucket.
std::uint64_t loss_bucket_upper(LossBucket bucket) noexcept;
LossBucket loss_bucket_for(std::uint64_t loss_usd) noexcept;

/// Fixed, versioned slot layout of an AggregationVector.
namespace slots {

inline constexpr std::string_view kLayoutVersion = "scrambench.agg.v1";

inline constexpr std::size_t kMaturityIndexBase = 0;
inline constexpr std::size_t kLevelCountBase = kMaturityIndexBase + kControlCount;
inline constexpr std::size_t kIncidentCount = kLevelCountBase + kControlCount * kLevelCount;
inline constexpr std::size_t kTotalLoss = kIncidentCount + 1;
inline constexpr std::size_t kAttributedLossBase = kTotalLoss + 1;
inline constexpr std::size_t kLossBucketBase = kAttributedLossBase + kControlCount;
inline constexpr std::size_t kCount = kLossBucketBase + kLossBucketCount;

inline constexpr std::uint64_t kMaxMaturityIndex = 3;
inline constexpr std::uint64_t kMaxOneHot = 1;
inline constexpr std::uint64_t kMaxIncidents = 1'000'000;
inline constexpr std::uint64_t kMaxDollars = 10'000'000'000ULL;

constexpr std::size_t maturity_index(ControlId id) { return kMaturityIndexBase + id.ordinal(); }
constexpr std::size_t level_count(ControlId id, MaturityLevel level) {
    return kLevelCountBase + id.ordinal() * kLevelCount + static_cast<std::size_t>(level_index(level));
}
constexpr std::size_t attributed_loss(ControlId id) { return kAttributedLossBase + id.ordinal(); }
constexpr std::size_t loss_bucket(LossBucket b) {
    return kLossBucketBase + static_cast<std::size_t>(b);
}

/// Largest value an honest participant may place in the slot.
std::uint64_t max_value(std::size_t slot);
std::string name(std::size_t slot);

} // namespace slots

struct AggregationVector {
    std::array<std::uint64_t, slots::kCount> values{};

    std::uint64_t operator[](std::size_t slot) const { return values[slot]; }
    std::uint64_t &operator[](std::size_t slot) { return values[slot]; }
    friend bool operator==(const AggregationVector &, const AggregationVector &) = default;
};

/// Throws SlotOverflow if a slot exceeds its declared maximum.
AggregationVector encode(const ParticipantResponse &response, const LossAllocation &allocated);

/// The values sent to one server for one cohort by one participant session.
struct ShareBundle {
    std::size_t server_index = 1; // 1..server_count
    std::size_t server_count = 0;
    std::string cohort;
    std::string session_token;
    std::uint64_t modulus = FieldElement::kModulus;
    std::vector<FieldElement> shares;
};

/// Splits every slot into `server_count` shares. The first M-1 shares are
/// uniform draws; the last closes the sum mod p.
std::vector<ShareBundle> split(const AggregationVector &v, std::size_t server_count,
                               ShareRng &rng, std::string_view cohort = "all",
                               std::string_view session_token = "");

/// Random session token (hex) drawn from rng.
std::string make_session_token(ShareRng &rng);

/// One server's running modular sum for one cohort.
struct CohortPartial {
    std::size_t server_index = 1;
    std::size_t server_count = 0;
    std::string cohort;
    std::uint64_t modulus = FieldElement::kModulus;
    std::uint64_t participants = 0;
    std::vector<FieldElement> sums;
    std::set<std::string> sessions;
};

CohortPartial empty_partial(std::size_t server_index, std::size_t server_count,
                            std::string_view cohort);

/// Slot-wise modular addition of one bundle. Throws DuplicateSubmission,
/// ModulusMismatch, ServerIndexMismatch, LayoutMismatch, UnknownCohort.
CohortPartial server_accumulate(CohortPartial state, const ShareBundle &incoming);
/// In-place form; `state` is untouched when a check fails.
void accumulate_into(CohortPartial &state, const ShareBundle &incoming);

inline constexpr std::uint64_t kDefaultMinCohortSize = 5;
inline constexpr std::uint64_t kSmallCohortWarning = 10;

struct AggregateReport {
    std::string cohort;
    std::uint64_t participants = 0;
    AggregationVector totals;

    friend bool operator==(const AggregateReport &, const AggregateReport &) = default;
};

/// Reconstructs plaintext totals from all M partials. Throws MissingPartial,
/// ModulusMismatch, ProtocolError on inconsistent partials and CohortTooSmall
/// when fewer than `min_cohort_size` participants contributed.
AggregateReport combine(const std::vector<CohortPartial> &partials,
                        std::uint64_t min_cohort_size = kDefaultMinCohortSize);

/// Direct column sums without sharing: the reference the secure path must match.
AggregateReport plaintext_sum(const std::vector<AggregationVector> &vectors,
                              std::string_view cohort,
                              std::uint64_t min_cohort_size = kDefaultMinCohortSize);

} // namespace scrambench
