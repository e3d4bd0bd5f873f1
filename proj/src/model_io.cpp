#include "hitctl/model_io.hpp"

#include "hitctl/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hitctl {

namespace {

using json = nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
    return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("error while writing '" + path.string() + "'");
}

void expect_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + " must be an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.contains(key)) throw ParseError(where + ": unknown field '" + key + "'");
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
    return *it;
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(where + " must be a number");
    return v.get<double>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ParseError(where + " must be a string");
    return v.get<std::string>();
}

class NameTable {
public:
    explicit NameTable(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (!index_.emplace(names[i], i).second) throw ParseError("duplicate state name '" + names[i] + "'");
    }

    StateIndex resolve(const std::string& name, const std::string& where) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw ParseError(where + ": unknown state '" + name + "'");
        return it->second;
    }

private:
    std::map<std::string, StateIndex> index_;
};

std::vector<double> parse_row(const json& obj, const NameTable& names, std::size_t n, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + ": transition must map state names to probabilities");
    std::vector<double> row(n, 0.0);
    for (const auto& [name, p] : obj.items()) {
        const StateIndex y = names.resolve(name, where);
        row[y] = as_number(p, where + ", transition to '" + name + "'");
    }
    double sum = 0.0;
    for (double p : row) sum += p;
    if (std::abs(sum - 1.0) <= kRowSumTolerance) renormalize_row(row);
    return row;
}

json dump_row(const MarkovControlModel& model, const std::vector<double>& row) {
    json out = json::object();
    for (std::size_t y = 0; y < row.size(); ++y)
        if (row[y] != 0.0) out[model.state_name(y)] = row[y];
    return out;
}

} // namespace

ModelFile parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed model document: ") + e.what());
    }
    expect_keys(doc, {"schema_version", "discount", "states", "target", "base_cost", "actions",
                      "in_target_dynamics", "weight"},
                "model");

    const json& version = require(doc, "schema_version", "model");
    if (!version.is_number_integer() || version.get<int>() != kModelSchemaVersion)
        throw ParseError("unsupported schema_version (expected " + std::to_string(kModelSchemaVersion) + ")");

    const double discount = as_number(require(doc, "discount", "model"), "discount");

    const json& states_json = require(doc, "states", "model");
    if (!states_json.is_array() || states_json.empty()) throw ParseError("states must be a nonempty array");
    std::vector<std::string> state_names;
    for (const auto& s : states_json) state_names.push_back(as_string(s, "state name"));
    const NameTable names(state_names);
    const std::size_t n = state_names.size();

    const json& target_json = require(doc, "target", "model");
    if (!target_json.is_array()) throw ParseError("target must be an array of state names");
    std::vector<StateIndex> target;
    std::vector<bool> is_target(n, false);
    for (const auto& t : target_json) {
        const StateIndex s = names.resolve(as_string(t, "target entry"), "target");
        if (is_target[s]) throw ParseError("target lists state '" + state_names[s] + "' twice");
        is_target[s] = true;
        target.push_back(s);
    }

    std::vector<std::optional<double>> base_cost(n);
    if (auto it = doc.find("base_cost"); it != doc.end()) {
        if (!it->is_object()) throw ParseError("base_cost must map state names to numbers");
        for (const auto& [name, c] : it->items())
            base_cost[names.resolve(name, "base_cost")] = as_number(c, "base_cost of '" + name + "'");
    }

    std::vector<std::vector<Action>> actions(n);
    const json& actions_json = require(doc, "actions", "model");
    if (!actions_json.is_object()) throw ParseError("actions must map state names to action lists");
    for (const auto& [name, list] : actions_json.items()) {
        const StateIndex s = names.resolve(name, "actions");
        if (is_target[s]) throw ParseError("actions: target state '" + name + "' takes no out-of-target actions");
        if (!list.is_array()) throw ParseError("actions of '" + name + "' must be an array");
        for (const auto& a : list) {
            const std::string where = "state '" + name + "', action";
            expect_keys(a, {"label", "transition", "cost", "action_cost"}, where);
            Action action;
            action.label = as_string(require(a, "label", where), where + " label");
            const std::string at = where + " '" + action.label + "'";
            action.transition = parse_row(require(a, "transition", at), names, n, at);
            const bool has_total = a.contains("cost");
            const bool has_part = a.contains("action_cost");
            if (has_total == has_part) throw ParseError(at + ": give exactly one of 'cost' or 'action_cost'");
            if (has_total) {
                action.cost = as_number(a["cost"], at + " cost");
            } else {
                if (!base_cost[s]) throw ParseError(at + ": 'action_cost' needs a base_cost for state '" + name + "'");
                action.cost = *base_cost[s] + as_number(a["action_cost"], at + " action_cost");
            }
            actions[s].push_back(std::move(action));
        }
    }

    std::optional<std::vector<TargetAction>> dynamics;
    if (auto it = doc.find("in_target_dynamics"); it != doc.end()) {
        if (!it->is_object()) throw ParseError("in_target_dynamics must map target state names to actions");
        std::vector<std::optional<TargetAction>> by_state(n);
        for (const auto& [name, g] : it->items()) {
            const StateIndex s = names.resolve(name, "in_target_dynamics");
            if (!is_target[s]) throw ParseError("in_target_dynamics: state '" + name + "' is not a target state");
            const std::string where = "in-target action of '" + name + "'";
            expect_keys(g, {"label", "transition"}, where);
            by_state[s] = TargetAction{as_string(require(g, "label", where), where + " label"),
                                       parse_row(require(g, "transition", where), names, n, where)};
        }
        dynamics.emplace();
        for (StateIndex s = 0; s < n; ++s) {
            if (!is_target[s]) continue;
            if (!by_state[s]) throw ParseError("in_target_dynamics: missing target state '" + state_names[s] + "'");
            dynamics->push_back(std::move(*by_state[s]));
        }
    }

    MarkovControlModel model(n, std::move(target), std::move(actions), discount, state_names, std::move(dynamics));

    std::optional<std::vector<double>> weight;
    if (auto it = doc.find("weight"); it != doc.end()) {
        if (!it->is_object()) throw ParseError("weight must map non-target state names to numbers");
        std::vector<std::optional<double>> by_state(n);
        for (const auto& [name, w] : it->items()) {
            const StateIndex s = names.resolve(name, "weight");
            if (is_target[s]) throw ParseError("weight: state '" + name + "' is a target state");
            by_state[s] = as_number(w, "weight of '" + name + "'");
        }
        weight.emplace();
        for (StateIndex s : model.nontarget_states()) {
            if (!by_state[s]) throw ParseError("weight: missing state '" + state_names[s] + "'");
            weight->push_back(*by_state[s]);
        }
    }

    require_valid(model);
    return ModelFile{std::move(model), std::move(weight)};
}

ModelFile load_model_file(const std::filesystem::path& path) {
    return parse_model(read_text(path));
}

MarkovControlModel load_model(const std::filesystem::path& path) {
    return load_model_file(path).model;
}

std::string dump_model(const ModelFile& file) {
    const MarkovControlModel& model = file.model;
    json doc;
    doc["schema_version"] = kModelSchemaVersion;
    doc["discount"] = model.discount();
    json states = json::array();
    for (StateIndex s = 0; s < model.state_count(); ++s) states.push_back(model.state_name(s));
    doc["states"] = std::move(states);
    json target = json::array();
    for (StateIndex s : model.target_states()) target.push_back(model.state_name(s));
    doc["target"] = std::move(target);

    json actions = json::object();
    for (StateIndex s : model.nontarget_states()) {
        json list = json::array();
        for (const Action& a : model.actions(s)) {
            json entry;
            entry["label"] = a.label;
            entry["transition"] = dump_row(model, a.transition);
            entry["cost"] = a.cost;
            list.push_back(std::move(entry));
        }
        actions[model.state_name(s)] = std::move(list);
    }
    doc["actions"] = std::move(actions);

    if (model.has_target_dynamics()) {
        json dyn = json::object();
        for (StateIndex s : model.target_states()) {
            const TargetAction& g = model.target_action(s);
            dyn[model.state_name(s)] = json{{"label", g.label}, {"transition", dump_row(model, g.transition)}};
        }
        doc["in_target_dynamics"] = std::move(dyn);
    }
    if (file.weight) {
        json w = json::object();
        for (std::size_t i = 0; i < file.weight->size(); ++i) w[model.state_name(model.state_at(i))] = (*file.weight)[i];
        doc["weight"] = std::move(w);
    }
    return doc.dump(2) + "\n";
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
    write_text(path, dump_model(file));
}

StationaryPolicy parse_policy(const MarkovControlModel& model, const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed policy document: ") + e.what());
    }
    expect_keys(doc, {"policy"}, "policy document");
    const json& map = require(doc, "policy", "policy document");
    if (!map.is_object()) throw ParseError("policy must map state names to action labels");

    std::vector<std::optional<std::size_t>> chosen(model.nontarget_count());
    for (const auto& [name, label_json] : map.items()) {
        const auto s = model.find_state(name);
        if (!s) throw ParseError("policy: unknown state '" + name + "'");
        const auto pos = model.position(*s);
        if (!pos) throw ParseError("policy: state '" + name + "' is a target state");
        const std::string label = as_string(label_json, "policy action of '" + name + "'");
        const auto& acts = model.actions(*s);
        for (std::size_t a = 0; a < acts.size(); ++a)
            if (acts[a].label == label) chosen[*pos] = a;
        if (!chosen[*pos]) throw ParseError("policy: state '" + name + "' has no action '" + label + "'");
    }
    StationaryPolicy out;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        if (!chosen[i]) throw ParseError("policy: missing state '" + model.state_name(model.state_at(i)) + "'");
        out.actions.push_back(*chosen[i]);
    }
    return out;
}

StationaryPolicy load_policy(const MarkovControlModel& model, const std::filesystem::path& path) {
    return parse_policy(model, read_text(path));
}

} // namespace hitctl
