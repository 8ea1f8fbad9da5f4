#include "scrambench/response.hpp"
#include "scrambench/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace scrambench {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(ViolationCode code) {
    switch (code) {
    case ViolationCode::LossBelowSignificanceFloor: return "LossBelowSignificanceFloor";
    case ViolationCode::MissingFailureAttribution: return "MissingFailureAttribution";
    case ViolationCode::TooManyFailureAttributions: return "TooManyFailureAttributions";
    case ViolationCode::FailuresWithoutIncident: return "FailuresWithoutIncident";
    case ViolationCode::LossWithoutIncident: return "LossWithoutIncident";
    }
    return "Unknown";
}

std::vector<Violation> validate_response(const ParticipantResponse &r) {
    std::vector<Violation> out;
    const auto failures = r.failed_controls.size();
    if (r.incident_count > 0) {
        if (r.total_loss_usd < kSignificantLossFloorUsd * r.incident_count)
            out.push_back({ViolationCode::LossBelowSignificanceFloor,
                           "total loss " + std::to_string(r.total_loss_usd) + " below " +
                               std::to_string(kSignificantLossFloorUsd) + " x " +
                               std::to_string(r.incident_count) + " incidents"});
        if (failures == 0)
            out.push_back({ViolationCode::MissingFailureAttribution,
                           "incidents reported without any failed control"});
        if (failures > kMaxFailedControls)
            out.push_back({ViolationCode::TooManyFailureAttributions,
                           std::to_string(failures) + " failed controls, at most " +
                               std::to_string(kMaxFailedControls) + " allowed"});
    } else {
        if (failures > 0)
            out.push_back({ViolationCode::FailuresWithoutIncident,
                           "failed controls listed but no incidents reported"});
        if (r.total_loss_usd > 0)
            out.push_back({ViolationCode::LossWithoutIncident,
                           "loss reported but no incidents reported"});
    }
    return out;
}

std::string_view cohort_tag(Cohort cohort) noexcept {
    switch (cohort) {
    case Cohort::All: return "all";
    case Cohort::PopulationOver25k: return "pop-over-25k";
    case Cohort::Population15kTo25k: return "pop-15k-25k";
    case Cohort::Population5kTo15k: return "pop-5k-15k";
    case Cohort::PopulationUnder5k: return "pop-under-5k";
    case Cohort::PopulationUnreported: return "pop-unreported";
    }
    return "";
}

std::string_view cohort_description(Cohort cohort) noexcept {
    switch (cohort) {
    case Cohort::All: return "All municipalities combined";
    case Cohort::PopulationOver25k: return "Population 25,000 and over";
    case Cohort::Population15kTo25k: return "Population 15,000 to under 25,000";
    case Cohort::Population5kTo15k: return "Population 5,000 to under 15,000";
    case Cohort::PopulationUnder5k: return "Population under 5,000";
    case Cohort::PopulationUnreported: return "No reported population";
    }
    return "";
}

std::optional<Cohort> parse_cohort_tag(std::string_view tag) {
    for (Cohort c : kAllCohorts)
        if (cohort_tag(c) == tag)
            return c;
    return std::nullopt;
}

Cohort population_cohort(const ParticipantResponse &r) noexcept {
    if (!r.population)
        return Cohort::PopulationUnreported;
    const auto pop = *r.population;
    if (pop >= 25000)
        return Cohort::PopulationOver25k;
    if (pop >= 15000)
        return Cohort::Population15kTo25k;
    if (pop >= 5000)
        return Cohort::Population5kTo15k;
    return Cohort::PopulationUnder5k;
}

std::map<Cohort, std::vector<ParticipantResponse>>
assign_cohorts(const std::vector<ParticipantResponse> &responses) {
    std::map<Cohort, std::vector<ParticipantResponse>> out;
    for (Cohort c : kAllCohorts)
        out[c];
    for (const auto &r : responses) {
        out[Cohort::All].push_back(r);
        out[population_cohort(r)].push_back(r);
    }
    return out;
}

ordered_json response_to_json(const ParticipantResponse &r) {
    ordered_json j;
    j["participant_id"] = r.participant_id;
    if (r.population)
        j["population"] = *r.population;
    else
        j["population"] = nullptr;
    ordered_json maturity = ordered_json::object();
    for (ControlId id : all_controls())
        maturity[id.code()] = std::string(level_token(r.level(id)));
    j["maturity"] = std::move(maturity);
    j["incident_count"] = r.incident_count;
    j["total_loss_usd"] = r.total_loss_usd;
    ordered_json failed = ordered_json::array();
    for (ControlId id : r.failed_controls)
        failed.push_back(id.code());
    j["failed_controls"] = std::move(failed);
    return j;
}

namespace {

std::uint64_t read_count(const json &j, const char *key) {
    if (!j.contains(key))
        throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
    const auto &v = j.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0))
        throw Error(ErrorCode::ParseError,
                    std::string("field '") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

} // namespace

ParticipantResponse response_from_json(const json &j) {
    if (!j.is_object())
        throw Error(ErrorCode::ParseError, "questionnaire must be a JSON object");
    ParticipantResponse r;
    if (j.contains("participant_id")) {
        if (!j["participant_id"].is_string())
            throw Error(ErrorCode::ParseError, "participant_id must be a string");
        r.participant_id = j["participant_id"].get<std::string>();
    }
    if (j.contains("population") && !j["population"].is_null())
        r.population = read_count(j, "population");

    if (!j.contains("maturity") || !j["maturity"].is_object())
        throw Error(ErrorCode::ParseError, "missing 'maturity' object");
    std::array<bool, kControlCount> seen{};
    for (const auto &[key, value] : j["maturity"].items()) {
        auto id = ControlId::parse(key);
        if (!id)
            throw Error(ErrorCode::ParseError, "unknown control '" + key + "'");
        if (!value.is_string())
            throw Error(ErrorCode::ParseError, "maturity for " + key + " must be a string");
        auto level = parse_level_token(value.get<std::string>());
        if (!level)
            throw Error(ErrorCode::ParseError, "bad maturity level '" +
                                                   value.get<std::string>() + "' for " + key);
        r.set_level(*id, *level);
        seen[id->ordinal()] = true;
    }
    std::string missing;
    for (ControlId id : all_controls())
        if (!seen[id.ordinal()])
            missing += (missing.empty() ? "" : ", ") + id.code();
    if (!missing.empty())
        throw Error(ErrorCode::ParseError, "maturity missing controls: " + missing);

    r.incident_count = read_count(j, "incident_count");
    r.total_loss_usd = read_count(j, "total_loss_usd");
    if (j.contains("failed_controls")) {
        if (!j["failed_controls"].is_array())
            throw Error(ErrorCode::ParseError, "failed_controls must be an array");
        for (const auto &v : j["failed_controls"]) {
            auto id = v.is_string() ? ControlId::parse(v.get<std::string>()) : std::nullopt;
            if (!id)
                throw Error(ErrorCode::ParseError, "bad failed control " + v.dump());
            r.failed_controls.insert(*id);
        }
    }
    return r;
}

ParticipantResponse load_response(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error &e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    try {
        return response_from_json(j);
    } catch (const Error &e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

void save_response(const ParticipantResponse &r, const std::string &path) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path);
    out << response_to_json(r).dump(2) << '\n';
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    for (auto &s : cells) {
        auto b = s.find_first_not_of(" \t");
        auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }
    return cells;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_mark(const std::string &cell) { return lower(cell) == "x"; }

std::uint64_t parse_count_cell(const std::string &cell, const std::string &what, int line) {
    std::string digits;
    for (char c : cell)
        if (c != ',' && c != '$' && c != ' ')
            digits += c;
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                       [](unsigned char c) { return std::isdigit(c); }))
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what +
                                               " must be a non-negative integer");
    return std::stoull(digits);
}

// Column header -> level. Accepts the tokens or the spelled-out form.
std::optional<MaturityLevel> header_level(const std::string &cell) {
    const auto s = lower(cell);
    if (auto l = parse_level_token(s))
        return l;
    if (s.rfind("not", 0) == 0) return MaturityLevel::NotImplemented;
    if (s.rfind("partial", 0) == 0) return MaturityLevel::PartiallyImplemented;
    if (s.rfind("large", 0) == 0 || s.rfind("mostly", 0) == 0)
        return MaturityLevel::LargelyImplemented;
    if (s.rfind("full", 0) == 0) return MaturityLevel::FullyImplemented;
    return std::nullopt;
}

} // namespace

ParticipantResponse import_matrix_csv(std::string_view text) {
    ParticipantResponse r;
    std::array<bool, kControlCount> seen{};
    std::array<std::optional<MaturityLevel>, 8> columns{};
    std::optional<std::size_t> failed_column;
    bool have_header = false;

    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto cells = split_csv_line(raw);
        if (cells.empty() || (cells.size() == 1 && cells[0].empty()) || cells[0].rfind('#', 0) == 0)
            continue;
        const auto key = lower(cells[0]);
        const std::string value = cells.size() > 1 ? cells[1] : std::string();

        if (key == "control") {
            columns = {};
            failed_column.reset();
            for (std::size_t c = 1; c < cells.size() && c < columns.size(); ++c) {
                if (lower(cells[c]).rfind("fail", 0) == 0)
                    failed_column = c;
                else
                    columns[c] = header_level(cells[c]);
            }
            have_header = true;
            continue;
        }
        if (key == "participant_id") {
            r.participant_id = value;
            continue;
        }
        if (key == "population") {
            if (!value.empty())
                r.population = parse_count_cell(value, "population", line_no);
            continue;
        }
        if (key == "incidents" || key == "incident_count") {
            r.incident_count = parse_count_cell(value, "incidents", line_no);
            continue;
        }
        if (key == "loss_usd" || key == "total_loss_usd") {
            r.total_loss_usd = parse_count_cell(value, "loss_usd", line_no);
            continue;
        }

        auto id = ControlId::parse(cells[0]);
        if (!id)
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": unrecognized row '" + cells[0] + "'");
        if (!have_header)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                                   ": control row before 'control' header");
        std::optional<MaturityLevel> level;
        for (std::size_t c = 1; c < cells.size() && c < columns.size(); ++c) {
            if (!columns[c] || !is_mark(cells[c]))
                continue;
            if (level)
                throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                                       ": more than one level marked for " +
                                                       id->code());
            level = columns[c];
        }
        if (!level)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                                   ": no level marked for " + id->code());
        if (seen[id->ordinal()])
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                                   ": duplicate row for " + id->code());
        r.set_level(*id, *level);
        seen[id->ordinal()] = true;
        if (failed_column && *failed_column < cells.size() && is_mark(cells[*failed_column]))
            r.failed_controls.insert(*id);
    }

    std::string missing;
    for (ControlId id : all_controls())
        if (!seen[id.ordinal()])
            missing += (missing.empty() ? "" : ", ") + id.code();
    if (!missing.empty())
        throw Error(ErrorCode::ParseError, "matrix missing controls: " + missing);
    return r;
}

} // namespace scrambench
