#include "cohortflow/serialization.hpp"

#include "cohortflow/evaluation.hpp"
#include "cohortflow/ingestion.hpp"

#include <cmath>
#include <set>

namespace cohortflow {

namespace {

const Json& require(const Json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end()) {
        throw ParseError(std::string("missing key '") + key + "'");
    }
    return *it;
}

std::vector<std::string> label_array(const Json& doc, const char* key) {
    const Json& value = require(doc, key);
    if (!value.is_array()) {
        throw ParseError(std::string("'") + key + "' must be an array of labels");
    }
    std::vector<std::string> labels;
    for (const auto& item : value) {
        if (!item.is_string()) {
            throw ParseError(std::string("'") + key + "' must contain only strings");
        }
        labels.push_back(item.get<std::string>());
    }
    return labels;
}

double number(const Json& value, const std::string& what) {
    if (!value.is_number()) {
        throw ParseError(what + " must be a number");
    }
    return value.get<double>();
}

Json term_to_json(const TermId& term) {
    return Json{{"index", term.index}, {"label", term.label}, {"term_type", term.term_type}};
}

TermId term_from_json(const Json& doc) {
    if (!doc.is_object()) {
        throw ParseError("term must be an object");
    }
    const Json& index = require(doc, "index");
    if (!index.is_number_integer()) {
        throw ParseError("term index must be an integer");
    }
    return TermId{index.get<int>(), doc.value("label", std::string{}),
                  doc.value("term_type", std::string{})};
}

Json labelled(const std::vector<std::string>& labels, std::span<const double> values) {
    Json out = Json::object();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out[labels[i]] = values[i];
    }
    return out;
}

std::string describe(const Violation& v, const StateSpace& space) {
    const std::string row = v.kind == Violation::Kind::Inflow ? "" : space.enrolled().at(v.row);
    switch (v.kind) {
    case Violation::Kind::RowSum:
        return "row '" + row + "' sums to " + format_number(v.value);
    case Violation::Kind::NegativeEntry:
        return "row '" + row + "' column '" + space.states().at(*v.column) +
               "' is negative: " + format_number(v.value);
    case Violation::Kind::EntryAboveOne:
        return "row '" + row + "' column '" + space.states().at(*v.column) +
               "' exceeds 1: " + format_number(v.value);
    case Violation::Kind::NonFiniteEntry:
        return "row '" + row + "' column '" + space.states().at(*v.column) + "' is not finite";
    case Violation::Kind::Inflow:
        return v.message;
    }
    return v.message;
}

} // namespace

Json model_to_json(const TransitionModel& model) {
    const StateSpace& space = model.space();
    const ModelMeta& meta = model.meta();

    Json term_pairs = Json::array();
    for (const auto& pair : meta.term_pairs) {
        term_pairs.push_back({{"from", term_to_json(pair.from)}, {"to", term_to_json(pair.to)}});
    }
    Json meta_doc{{"alpha", meta.alpha}, {"term_pairs", term_pairs}, {"weights", meta.weights}};
    meta_doc["decay"] = meta.decay ? Json(*meta.decay) : Json(nullptr);
    meta_doc["inflow_policy"] = meta.inflow_policy;
    meta_doc["term_type_filter"] =
        meta.term_type_filter ? Json(*meta.term_type_filter) : Json(nullptr);
    meta_doc["created"] = meta.created;
    meta_doc["diagnostics"] = meta.diagnostics;
    Json last = Json::object();
    for (const auto& label : space.enrolled()) {
        if (const auto it = meta.last_counts.find(label); it != meta.last_counts.end()) {
            last[label] = it->second;
        }
    }
    meta_doc["last_counts"] = last;

    return Json{{"states", space.states()},
                {"enrolled", space.enrolled()},
                {"absorbing", space.absorbing()},
                {"matrix", model.matrix().to_rows()},
                {"inflow", labelled(space.enrolled(), model.inflow())},
                {"meta", meta_doc}};
}

static TransitionModel model_from_json_unchecked(const Json& doc) {
    if (!doc.is_object()) {
        throw ParseError("model document must be a JSON object");
    }
    std::optional<StateSpace> maybe_space;
    try {
        maybe_space.emplace(label_array(doc, "states"), label_array(doc, "enrolled"),
                            label_array(doc, "absorbing"));
    } catch (const ValidationError& e) {
        throw ParseError(std::string("bad state space: ") + e.what());
    }
    const StateSpace& space = *maybe_space;

    const Json& rows = require(doc, "matrix");
    if (!rows.is_array() || rows.size() != space.enrolled_size()) {
        throw ParseError("'matrix' must have one row per enrolled state (" +
                         std::to_string(space.enrolled_size()) + ")");
    }
    Matrix matrix(space.enrolled_size(), space.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string& label = space.enrolled()[r];
        if (!rows[r].is_array() || rows[r].size() != space.size()) {
            throw ParseError("row '" + label + "' must have " + std::to_string(space.size()) +
                             " entries");
        }
        for (std::size_t c = 0; c < space.size(); ++c) {
            matrix(r, c) = number(rows[r][c], "entry in row '" + label + "'");
        }
    }

    std::vector<double> inflow(space.enrolled_size(), 0.0);
    if (const auto it = doc.find("inflow"); it != doc.end()) {
        if (!it->is_object()) {
            throw ParseError("'inflow' must be an object of label -> number");
        }
        for (const auto& [label, value] : it->items()) {
            const auto e = space.enrolled_index_of(label);
            if (!e) {
                throw ParseError("inflow names '" + label + "', which is not an enrolled state");
            }
            inflow[*e] = number(value, "inflow for '" + label + "'");
        }
    } else {
        throw ParseError("missing key 'inflow'");
    }

    ModelMeta meta;
    if (const auto it = doc.find("meta"); it != doc.end() && !it->is_null()) {
        const Json& m = *it;
        if (!m.is_object()) {
            throw ParseError("'meta' must be an object");
        }
        if (const auto a = m.find("alpha"); a != m.end()) {
            meta.alpha = number(*a, "meta.alpha");
        }
        if (const auto pairs = m.find("term_pairs"); pairs != m.end()) {
            if (!pairs->is_array()) {
                throw ParseError("meta.term_pairs must be an array");
            }
            for (const auto& p : *pairs) {
                if (!p.is_object()) {
                    throw ParseError("meta.term_pairs entries must be objects");
                }
                meta.term_pairs.push_back(
                    {term_from_json(require(p, "from")), term_from_json(require(p, "to"))});
            }
        }
        if (const auto w = m.find("weights"); w != m.end()) {
            if (!w->is_array()) {
                throw ParseError("meta.weights must be an array");
            }
            for (const auto& x : *w) {
                meta.weights.push_back(number(x, "meta.weights entry"));
            }
        }
        if (const auto d = m.find("decay"); d != m.end() && !d->is_null()) {
            meta.decay = number(*d, "meta.decay");
        }
        if (const auto p = m.find("inflow_policy"); p != m.end() && p->is_string()) {
            meta.inflow_policy = p->get<std::string>();
        }
        if (const auto f = m.find("term_type_filter"); f != m.end() && f->is_string()) {
            meta.term_type_filter = f->get<std::string>();
        }
        if (const auto c = m.find("created"); c != m.end() && c->is_string()) {
            meta.created = c->get<std::string>();
        }
        if (const auto diag = m.find("diagnostics"); diag != m.end() && diag->is_array()) {
            for (const auto& x : *diag) {
                if (x.is_string()) {
                    meta.diagnostics.push_back(x.get<std::string>());
                }
            }
        }
        if (const auto last = m.find("last_counts"); last != m.end() && last->is_object()) {
            for (const auto& [label, value] : last->items()) {
                if (!space.is_enrolled(label)) {
                    throw ParseError("meta.last_counts names '" + label +
                                     "', which is not an enrolled state");
                }
                meta.last_counts[label] = number(value, "meta.last_counts entry");
            }
        }
    }

    TransitionModel model(space, std::move(matrix), std::move(inflow), std::move(meta));
    if (const auto check = validate_model(model); !check.ok()) {
        std::string message = describe(check.violations.front(), space);
        for (std::size_t i = 1; i < check.violations.size(); ++i) {
            message += "; " + describe(check.violations[i], space);
        }
        throw ValidationError(message);
    }
    return model;
}

TransitionModel model_from_json(const Json& doc) {
    try {
        return model_from_json_unchecked(doc);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed model document: ") + e.what());
    }
}

std::string write_model(const TransitionModel& model) {
    require_valid(model);
    return model_to_json(model).dump(2) + "\n";
}

TransitionModel read_model(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("model document is not valid JSON: ") + e.what());
    }
    return model_from_json(doc);
}

static ScenarioSpec scenario_from_json_unchecked(const Json& doc, int default_horizon) {
    ScenarioSpec spec;
    spec.horizon = default_horizon;
    if (doc.is_null()) {
        return spec;
    }
    if (!doc.is_object()) {
        throw ParseError("scenario must be a JSON object");
    }
    static const std::set<std::string> known{"cell_overrides", "inflow_multiplier", "inflow",
                                             "horizon"};
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) {
            throw ParseError("unknown scenario key '" + key + "'");
        }
    }
    if (const auto it = doc.find("cell_overrides"); it != doc.end()) {
        if (!it->is_array()) {
            throw ParseError("cell_overrides must be an array");
        }
        for (const auto& o : *it) {
            if (!o.is_object() || !require(o, "from").is_string() || !require(o, "to").is_string()) {
                throw ParseError("each cell override needs string 'from' and 'to'");
            }
            spec.cell_overrides.push_back({o["from"].get<std::string>(), o["to"].get<std::string>(),
                                           number(require(o, "probability"),
                                                  "override probability")});
        }
    }
    const auto multiplier = doc.find("inflow_multiplier");
    const auto absolute = doc.find("inflow");
    const bool has_multiplier = multiplier != doc.end() && !multiplier->is_null();
    const bool has_absolute = absolute != doc.end() && !absolute->is_null();
    if (has_multiplier && has_absolute) {
        throw ParseError("scenario may set inflow_multiplier or inflow, not both");
    }
    if (has_multiplier) {
        spec.inflow_override = InflowMultiplier{number(*multiplier, "inflow_multiplier")};
    } else if (has_absolute) {
        if (!absolute->is_object()) {
            throw ParseError("scenario inflow must be an object of label -> number");
        }
        InflowAbsolute values;
        for (const auto& [label, value] : absolute->items()) {
            values.values[label] = number(value, "inflow for '" + label + "'");
        }
        spec.inflow_override = std::move(values);
    }
    if (const auto h = doc.find("horizon"); h != doc.end() && !h->is_null()) {
        if (!h->is_number_integer()) {
            throw ParseError("scenario horizon must be an integer");
        }
        spec.horizon = h->get<int>();
    }
    return spec;
}

ScenarioSpec scenario_from_json(const Json& doc, int default_horizon) {
    try {
        return scenario_from_json_unchecked(doc, default_horizon);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed scenario: ") + e.what());
    }
}

Json scenario_to_json(const ScenarioSpec& spec) {
    Json overrides = Json::array();
    for (const auto& o : spec.cell_overrides) {
        overrides.push_back({{"from", o.from}, {"to", o.to}, {"probability", o.probability}});
    }
    Json doc{{"cell_overrides", overrides}};
    if (const auto* m = std::get_if<InflowMultiplier>(&spec.inflow_override)) {
        doc["inflow_multiplier"] = m->factor;
    } else if (const auto* a = std::get_if<InflowAbsolute>(&spec.inflow_override)) {
        Json values = Json::object();
        for (const auto& [label, value] : a->values) {
            values[label] = value;
        }
        doc["inflow"] = values;
    }
    doc["horizon"] = spec.horizon;
    return doc;
}

Json trajectory_to_json(const ForecastTrajectory& trajectory, const StateSpace& space) {
    Json points = Json::array();
    for (const auto& point : trajectory.points) {
        points.push_back(
            {{"step", point.step},
             {"counts", labelled(space.enrolled(), point.vector.counts())},
             {"total", point.vector.total()},
             {"flows",
              {{"inflow_total", point.flows.inflow_total},
               {"outflow_total", point.flows.outflow_total},
               {"per_absorbing", labelled(space.absorbing(), point.flows.per_absorbing)}}}});
    }
    return Json{{"horizon", trajectory.horizon},
                {"states", space.enrolled()},
                {"absorbing", space.absorbing()},
                {"points", points}};
}

Json deltas_to_json(const std::vector<StepDelta>& deltas, const StateSpace& space) {
    Json out = Json::array();
    for (const auto& d : deltas) {
        out.push_back({{"step", d.step},
                       {"per_state", labelled(space.enrolled(), d.per_state)},
                       {"total", d.total}});
    }
    return out;
}

Json report_to_json(const EvaluationReport& report) {
    Json rows = Json::array();
    for (const auto& row : report.rows) {
        Json r{{"period", row.period},
               {"projected", row.projected},
               {"actual", row.actual},
               {"difference_pct", row.difference_pct ? Json(*row.difference_pct) : Json(nullptr)}};
        if (!row.per_state.empty()) {
            Json per_state = Json::object();
            for (const auto& [label, pa] : row.per_state) {
                per_state[label] = {{"projected", pa.first}, {"actual", pa.second}};
            }
            r["per_state"] = per_state;
        }
        rows.push_back(std::move(r));
    }
    return Json{{"rows", rows},
                {"bias_pct", report.bias_pct},
                {"mean_abs_difference_pct", report.mean_abs_difference_pct}};
}

std::string trajectory_to_csv(const ForecastTrajectory& trajectory, const StateSpace& space) {
    std::string out = "step";
    for (const auto& label : space.enrolled()) {
        out += "," + label;
    }
    out += ",total,inflow_total,outflow_total\n";
    auto num = [](double x) { return Json(x).dump(); };
    for (const auto& point : trajectory.points) {
        out += std::to_string(point.step);
        for (const double x : point.vector.counts()) {
            out += "," + num(x);
        }
        out += "," + num(point.vector.total()) + "," + num(point.flows.inflow_total) + "," +
               num(point.flows.outflow_total) + "\n";
    }
    return out;
}

std::map<std::string, double> parse_label_values(std::string_view text) {
    std::map<std::string, double> values;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view item = text.substr(0, comma);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw ParseError("expected label=value, got '" + std::string(item) + "'");
        }
        const std::string label(item.substr(0, eq));
        const std::string value_text(item.substr(eq + 1));
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(value_text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != value_text.size()) {
            throw ParseError("value for '" + label + "' is not a number: '" + value_text + "'");
        }
        if (!values.emplace(label, value).second) {
            throw ParseError("label '" + label + "' given twice");
        }
    }
    return values;
}

} // namespace cohortflow
