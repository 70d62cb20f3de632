#include "cohortflow/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

namespace cohortflow {

namespace {

struct CsvRecord {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

// RFC-4180 record reader. Quoted fields may contain commas, doubled quotes and
// line breaks; CRLF and LF both end a record.
class CsvReader {
public:
    explicit CsvReader(std::string_view text) : text_{text} {
        if (text_.starts_with("\xEF\xBB\xBF")) {
            text_.remove_prefix(3);
        }
    }

    bool next(CsvRecord& record) {
        while (pos_ < text_.size()) {
            record.line = line_;
            record.fields.clear();
            if (read_record(record.fields)) {
                return true;
            }
        }
        return false;
    }

private:
    // Returns false for blank lines.
    bool read_record(std::vector<std::string>& fields) {
        std::string field;
        bool any_content = false;
        bool in_quotes = false;
        bool was_quoted = false;
        const std::size_t start_line = line_;
        while (pos_ < text_.size()) {
            const char ch = text_[pos_++];
            if (in_quotes) {
                if (ch == '"') {
                    if (pos_ < text_.size() && text_[pos_] == '"') {
                        field.push_back('"');
                        ++pos_;
                    } else {
                        in_quotes = false;
                    }
                } else {
                    if (ch == '\n') {
                        ++line_;
                    }
                    field.push_back(ch);
                }
                continue;
            }
            if (ch == '"' && field.empty() && !was_quoted) {
                in_quotes = true;
                was_quoted = true;
                any_content = true;
            } else if (ch == ',') {
                fields.push_back(std::move(field));
                field.clear();
                was_quoted = false;
                any_content = true;
            } else if (ch == '\r' && pos_ < text_.size() && text_[pos_] == '\n') {
                continue;
            } else if (ch == '\n') {
                ++line_;
                break;
            } else {
                field.push_back(ch);
                any_content = true;
            }
        }
        if (in_quotes) {
            throw ParseError("unterminated quoted field starting at line " +
                                 std::to_string(start_line),
                             start_line);
        }
        if (!any_content) {
            return false;
        }
        fields.push_back(std::move(field));
        return true;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\r\n") == std::string::npos) {
        return value;
    }
    std::string quoted = "\"";
    for (const char ch : value) {
        if (ch == '"') {
            quoted.push_back('"');
        }
        quoted.push_back(ch);
    }
    quoted.push_back('"');
    return quoted;
}

std::string at_line(std::size_t line) { return " at line " + std::to_string(line); }

} // namespace

std::vector<EnrollmentSnapshot> parse_snapshot_csv(std::string_view text, const StateSpace& space) {
    CsvReader reader(text);
    CsvRecord record;
    if (!reader.next(record)) {
        throw ParseError("missing header '" + std::string(kSnapshotCsvHeader) + "'", 1);
    }
    const std::vector<std::string> expected_header{"term_index", "term_label", "student_id",
                                                   "state"};
    if (record.fields != expected_header) {
        throw ParseError("bad header" + at_line(record.line) + ", expected '" +
                             std::string(kSnapshotCsvHeader) + "'",
                         record.line);
    }

    std::map<int, EnrollmentSnapshot> by_term;
    while (reader.next(record)) {
        const std::size_t line = record.line;
        if (record.fields.size() != 4) {
            throw ParseError("expected 4 columns, got " + std::to_string(record.fields.size()) +
                                 at_line(line),
                             line);
        }
        const std::string& index_text = record.fields[0];
        int index = -1;
        const auto [ptr, ec] =
            std::from_chars(index_text.data(), index_text.data() + index_text.size(), index);
        if (ec != std::errc{} || ptr != index_text.data() + index_text.size() || index < 0) {
            throw ParseError("term_index '" + index_text + "' is not a non-negative integer" +
                                 at_line(line),
                             line);
        }
        const std::string& label = record.fields[1];
        const std::string& student = record.fields[2];
        const std::string& state = record.fields[3];
        if (student.empty()) {
            throw ParseError("empty student_id" + at_line(line), line);
        }
        if (!space.contains(state)) {
            throw ParseError("unknown state '" + state + "'" + at_line(line), line);
        }

        auto [it, inserted] = by_term.try_emplace(index);
        EnrollmentSnapshot& snapshot = it->second;
        if (inserted) {
            snapshot.term = TermId{index, label, term_type_from_label(label)};
        } else if (snapshot.term.label != label) {
            throw ParseError("term " + std::to_string(index) + " labelled both '" +
                                 snapshot.term.label + "' and '" + label + "'" + at_line(line),
                             line);
        }
        const auto [slot, fresh] = snapshot.roster.try_emplace(student, state);
        if (!fresh && slot->second != state) {
            throw ParseError("student '" + student + "' has conflicting states '" +
                                 slot->second + "' and '" + state + "' in term " +
                                 std::to_string(index) + at_line(line),
                             line);
        }
    }

    std::vector<EnrollmentSnapshot> snapshots;
    snapshots.reserve(by_term.size());
    for (auto& [index, snapshot] : by_term) {
        snapshots.push_back(std::move(snapshot));
    }
    return snapshots;
}

std::string write_snapshot_csv(const std::vector<EnrollmentSnapshot>& snapshots) {
    std::string out(kSnapshotCsvHeader);
    out.push_back('\n');
    for (const auto& snapshot : snapshots) {
        const std::string prefix =
            std::to_string(snapshot.term.index) + "," + csv_field(snapshot.term.label) + ",";
        for (const auto& [student, state] : snapshot.roster) {
            out += prefix;
            out += csv_field(student);
            out.push_back(',');
            out += csv_field(state);
            out.push_back('\n');
        }
    }
    return out;
}

const std::string* Trajectory::state_at(int index) const {
    if (path.empty()) {
        return nullptr;
    }
    const int offset = index - path.front().term.index;
    if (offset < 0 || offset >= static_cast<int>(path.size())) {
        return nullptr;
    }
    return &path[static_cast<std::size_t>(offset)].state;
}

std::vector<Trajectory> build_trajectories(const std::vector<EnrollmentSnapshot>& snapshots,
                                           const StateSpace& space) {
    for (std::size_t k = 1; k < snapshots.size(); ++k) {
        if (snapshots[k].term.index != snapshots[k - 1].term.index + 1) {
            throw StructureError("snapshot terms must be consecutive: " +
                                 std::to_string(snapshots[k - 1].term.index) + " is followed by " +
                                 std::to_string(snapshots[k].term.index));
        }
    }
    if (snapshots.empty()) {
        return {};
    }

    // student -> (snapshot position, state), in term order
    std::map<std::string, std::vector<std::pair<std::size_t, const std::string*>>> observed;
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        for (const auto& [student, state] : snapshots[k].roster) {
            observed[student].emplace_back(k, &state);
        }
    }

    auto require_label = [&](std::string_view label, const std::string& student) {
        if (!space.contains(label)) {
            throw StructureError("student '" + student + "' needs state '" + std::string(label) +
                                 "', which the state space does not declare");
        }
    };

    const std::size_t final_pos = snapshots.size() - 1;
    std::vector<Trajectory> trajectories;
    trajectories.reserve(observed.size());
    for (const auto& [student, rows] : observed) {
        Trajectory trajectory;
        trajectory.student_id = student;
        const std::size_t first = rows.front().first;
        const std::size_t last = rows.back().first;
        std::size_t next_row = 0;
        for (std::size_t k = first; k <= last; ++k) {
            if (rows[next_row].first == k) {
                const std::string& state = *rows[next_row].second;
                if (space.is_absorbing(state) && k != last) {
                    throw StructureError("student '" + student + "' reaches absorbing state '" +
                                         state + "' in term " +
                                         std::to_string(snapshots[k].term.index) +
                                         " but appears again later");
                }
                trajectory.path.push_back({snapshots[k].term, state, true});
                ++next_row;
            } else {
                require_label(kStopOutLabel, student);
                trajectory.path.push_back({snapshots[k].term, std::string(kStopOutLabel), false});
            }
        }
        const std::string& last_state = trajectory.path.back().state;
        if (!space.is_absorbing(last_state)) {
            if (last < final_pos) {
                require_label(kDepartedLabel, student);
                trajectory.path.push_back(
                    {snapshots[last + 1].term, std::string(kDepartedLabel), false});
            } else {
                trajectory.censored = true;
            }
        }
        trajectories.push_back(std::move(trajectory));
    }
    return trajectories;
}

std::vector<EnrollmentSnapshot> project_to_snapshots(const std::vector<Trajectory>& trajectories,
                                                     const std::vector<TermId>& terms) {
    std::vector<EnrollmentSnapshot> snapshots;
    snapshots.reserve(terms.size());
    std::map<int, std::size_t> position;
    for (const auto& term : terms) {
        position[term.index] = snapshots.size();
        snapshots.push_back({term, {}});
    }
    for (const auto& trajectory : trajectories) {
        for (const auto& entry : trajectory.path) {
            if (!entry.observed) {
                continue;
            }
            const auto it = position.find(entry.term.index);
            if (it == position.end()) {
                throw StructureError("trajectory of '" + trajectory.student_id +
                                     "' references unknown term " +
                                     std::to_string(entry.term.index));
            }
            snapshots[it->second].roster.emplace(trajectory.student_id, entry.state);
        }
    }
    return snapshots;
}

StateVector enrolled_headcount(const EnrollmentSnapshot& snapshot, const StateSpace& space) {
    std::vector<double> counts(space.enrolled_size(), 0.0);
    for (const auto& [student, state] : snapshot.roster) {
        if (const auto idx = space.enrolled_index_of(state)) {
            counts[*idx] += 1.0;
        }
    }
    return StateVector(std::move(counts));
}

} // namespace cohortflow
