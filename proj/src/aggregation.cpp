#include "scrambench/aggregation.hpp"
#include "scrambench/error.hpp"

#include <algorithm>
#include <cstdio>

namespace scrambench {

std::string_view loss_bucket_label(LossBucket bucket) noexcept {
    switch (bucket) {
    case LossBucket::From1kTo50k: return "1k-50k";
    case LossBucket::From50kTo100k: return "50k-100k";
    case LossBucket::From100kTo500k: return "100k-500k";
    case LossBucket::From500k: return "500k+";
    }
    return "";
}

std::uint64_t loss_bucket_lower(LossBucket bucket) noexcept {
    switch (bucket) {
    case LossBucket::From1kTo50k: return 1'000;
    case LossBucket::From50kTo100k: return 50'000;
    case LossBucket::From100kTo500k: return 100'000;
    case LossBucket::From500k: return 500'000;
    }
    return 0;
}

std::uint64_t loss_bucket_upper(LossBucket bucket) noexcept {
    switch (bucket) {
    case LossBucket::From1kTo50k: return 50'000;
    case LossBucket::From50kTo100k: return 100'000;
    case LossBucket::From100kTo500k: return 500'000;
    case LossBucket::From500k: return 0;
    }
    return 0;
}

LossBucket loss_bucket_for(std::uint64_t loss) noexcept {
    if (loss >= 500'000)
        return LossBucket::From500k;
    if (loss >= 100'000)
        return LossBucket::From100kTo500k;
    if (loss >= 50'000)
        return LossBucket::From50kTo100k;
    return LossBucket::From1kTo50k;
}

namespace slots {

std::uint64_t max_value(std::size_t slot) {
    if (slot < kLevelCountBase)
        return kMaxMaturityIndex;
    if (slot < kIncidentCount)
        return kMaxOneHot;
    if (slot == kIncidentCount)
        return kMaxIncidents;
    if (slot < kLossBucketBase)
        return kMaxDollars;
    if (slot < kCount)
        return kMaxOneHot;
    throw Error(ErrorCode::LayoutMismatch, "slot " + std::to_string(slot) + " out of range");
}

std::string name(std::size_t slot) {
    const auto control = [](std::size_t ordinal) {
        return ControlId::from_ordinal(ordinal)->code();
    };
    if (slot < kLevelCountBase)
        return "maturity_index." + control(slot - kMaturityIndexBase);
    if (slot < kIncidentCount) {
        const auto offset = slot - kLevelCountBase;
        return "level_count." + control(offset / kLevelCount) + "." +
               std::string(level_token(kAllLevels[offset % kLevelCount]));
    }
    if (slot == kIncidentCount)
        return "incident_count";
    if (slot == kTotalLoss)
        return "total_loss_usd";
    if (slot < kLossBucketBase)
        return "attributed_loss_usd." + control(slot - kAttributedLossBase);
    if (slot < kCount)
        return "loss_bucket." + std::string(loss_bucket_label(kAllLossBuckets[slot - kLossBucketBase]));
    throw Error(ErrorCode::LayoutMismatch, "slot " + std::to_string(slot) + " out of range");
}

} // namespace slots

AggregationVector encode(const ParticipantResponse &r, const LossAllocation &allocated) {
    AggregationVector v;
    for (ControlId id : all_controls()) {
        const MaturityLevel level = r.level(id);
        v[slots::maturity_index(id)] = static_cast<std::uint64_t>(level_index(level));
        v[slots::level_count(id, level)] = 1;
    }
    v[slots::kIncidentCount] = r.incident_count;
    v[slots::kTotalLoss] = r.total_loss_usd;
    for (const auto &[id, usd] : allocated)
        v[slots::attributed_loss(id)] = usd;
    if (r.incident_count > 0)
        v[slots::loss_bucket(loss_bucket_for(r.total_loss_usd))] = 1;

    for (std::size_t s = 0; s < slots::kCount; ++s)
        if (v[s] > slots::max_value(s))
            throw Error(ErrorCode::SlotOverflow, slots::name(s) + " = " + std::to_string(v[s]) +
                                                     " exceeds " +
                                                     std::to_string(slots::max_value(s)));
    return v;
}

std::vector<ShareBundle> split(const AggregationVector &v, std::size_t server_count,
                               ShareRng &rng, std::string_view cohort,
                               std::string_view session_token) {
    if (server_count < 2)
        throw Error(ErrorCode::InvalidInput, "secret sharing needs at least 2 servers");
    std::vector<ShareBundle> bundles(server_count);
    for (std::size_t i = 0; i < server_count; ++i) {
        bundles[i].server_index = i + 1;
        bundles[i].server_count = server_count;
        bundles[i].cohort = std::string(cohort);
        bundles[i].session_token = std::string(session_token);
        bundles[i].shares.resize(slots::kCount);
    }
    for (std::size_t s = 0; s < slots::kCount; ++s) {
        FieldElement remaining = FieldElement::reduce(v[s]);
        for (std::size_t i = 0; i + 1 < server_count; ++i) {
            const FieldElement share = uniform_field_element(rng);
            bundles[i].shares[s] = share;
            remaining = remaining - share;
        }
        bundles[server_count - 1].shares[s] = remaining;
    }
    return bundles;
}

std::string make_session_token(ShareRng &rng) {
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                  static_cast<unsigned long long>(rng.next_u64()),
                  static_cast<unsigned long long>(rng.next_u64()));
    return buf;
}

CohortPartial empty_partial(std::size_t server_index, std::size_t server_count,
                            std::string_view cohort) {
    CohortPartial p;
    p.server_index = server_index;
    p.server_count = server_count;
    p.cohort = std::string(cohort);
    p.sums.assign(slots::kCount, FieldElement{});
    return p;
}

void accumulate_into(CohortPartial &state, const ShareBundle &in) {
    if (in.modulus != state.modulus)
        throw Error(ErrorCode::ModulusMismatch, "bundle modulus " + std::to_string(in.modulus) +
                                                    " != " + std::to_string(state.modulus));
    if (in.server_index != state.server_index)
        throw Error(ErrorCode::ServerIndexMismatch,
                    "bundle for server " + std::to_string(in.server_index) + " sent to server " +
                        std::to_string(state.server_index));
    if (in.server_count != state.server_count)
        throw Error(ErrorCode::ProtocolError, "bundle assumes " + std::to_string(in.server_count) +
                                                  " servers, computation has " +
                                                  std::to_string(state.server_count));
    if (in.cohort != state.cohort)
        throw Error(ErrorCode::UnknownCohort,
                    "bundle cohort '" + in.cohort + "' sent to '" + state.cohort + "'");
    if (in.shares.size() != state.sums.size())
        throw Error(ErrorCode::LayoutMismatch, std::to_string(in.shares.size()) + " slots, expected " +
                                                   std::to_string(state.sums.size()));
    if (!in.session_token.empty() && state.sessions.count(in.session_token))
        throw Error(ErrorCode::DuplicateSubmission, "session already submitted to cohort " +
                                                        state.cohort);
    for (std::size_t s = 0; s < state.sums.size(); ++s)
        state.sums[s] += in.shares[s];
    if (!in.session_token.empty())
        state.sessions.insert(in.session_token);
    ++state.participants;
}

CohortPartial server_accumulate(CohortPartial state, const ShareBundle &incoming) {
    accumulate_into(state, incoming);
    return state;
}

namespace {

AggregateReport checked_report(std::string cohort, std::uint64_t n, AggregationVector totals,
                               std::uint64_t min_cohort_size) {
    if (n < min_cohort_size)
        throw Error(ErrorCode::CohortTooSmall, "cohort '" + cohort + "' has " + std::to_string(n) +
                                                   " participants, minimum is " +
                                                   std::to_string(min_cohort_size));
    return AggregateReport{std::move(cohort), n, totals};
}

} // namespace

AggregateReport combine(const std::vector<CohortPartial> &partials,
                        std::uint64_t min_cohort_size) {
    if (partials.empty())
        throw Error(ErrorCode::MissingPartial, "no partial sums supplied");
    const auto &first = partials.front();
    const std::size_t m = first.server_count;
    if (partials.size() != m)
        throw Error(ErrorCode::MissingPartial, std::to_string(partials.size()) + " of " +
                                                   std::to_string(m) + " partial sums supplied");
    std::vector<bool> present(m + 1, false);
    for (const auto &p : partials) {
        if (p.modulus != first.modulus)
            throw Error(ErrorCode::ModulusMismatch, "partials disagree on modulus");
        if (p.cohort != first.cohort)
            throw Error(ErrorCode::ProtocolError, "partials disagree on cohort");
        if (p.server_count != m)
            throw Error(ErrorCode::ProtocolError, "partials disagree on server count");
        if (p.participants != first.participants)
            throw Error(ErrorCode::ProtocolError, "partials disagree on participant count");
        if (p.sums.size() != slots::kCount)
            throw Error(ErrorCode::LayoutMismatch, "partial has wrong slot count");
        if (p.server_index < 1 || p.server_index > m || present[p.server_index])
            throw Error(ErrorCode::MissingPartial,
                        "partial set does not cover servers 1.." + std::to_string(m) + " exactly once");
        present[p.server_index] = true;
    }

    AggregationVector totals;
    for (std::size_t s = 0; s < slots::kCount; ++s) {
        FieldElement sum;
        for (const auto &p : partials)
            sum += p.sums[s];
        totals[s] = sum.value();
    }
    return checked_report(first.cohort, first.participants, totals, min_cohort_size);
}

AggregateReport plaintext_sum(const std::vector<AggregationVector> &vectors,
                              std::string_view cohort, std::uint64_t min_cohort_size) {
    AggregationVector totals;
    for (const auto &v : vectors)
        for (std::size_t s = 0; s < slots::kCount; ++s)
            totals[s] += v[s];
    return checked_report(std::string(cohort), vectors.size(), totals, min_cohort_size);
}

} // namespace scrambench
