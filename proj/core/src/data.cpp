#include "epmine/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "epmine/rng.hpp"

namespace epmine {

using ordered_json = nlohmann::ordered_json;

void EventVocabulary::rebuild_index() {
    index_.clear();
    index_.reserve(ids.size());
    for (size_t i = 0; i < ids.size(); ++i)
        index_.emplace(ids[i], static_cast<int32_t>(i));
}

std::vector<int> Dataset::label_supports() const {
    std::vector<int> supports(catalog.size(), 0);
    for (const auto& seq : sequences)
        for (size_t j = 0; j < supports.size(); ++j)
            if (seq.labels[j]) ++supports[j];
    return supports;
}

std::map<std::string, int> Dataset::label_supports_by_id() const {
    const std::vector<int> supports = label_supports();
    std::map<std::string, int> out;
    for (size_t j = 0; j < catalog.size(); ++j) out[catalog.labels[j].id] = supports[j];
    return out;
}

std::vector<TokenizedSequence> tokenize(const Dataset& dataset) {
    std::vector<TokenizedSequence> out;
    out.reserve(dataset.sequences.size());
    for (const auto& seq : dataset.sequences) {
        TokenizedSequence ts;
        ts.sid = seq.sid();
        ts.labels = seq.labels;
        ts.tokens.reserve(seq.events.size());
        for (const auto& e : seq.events) {
            const int32_t tok = dataset.vocabulary.token_of(e.id);
            if (tok < 0) throw DataError("tokenize: event '" + e.id + "' not in vocabulary");
            ts.tokens.push_back(tok);
        }
        out.push_back(std::move(ts));
    }
    return out;
}

void GeneratorSpec::validate() const {
    const size_t n = event_ids.size();
    if (n == 0) throw std::invalid_argument("generator spec: empty event vocabulary");
    if (sequences < 1) throw std::invalid_argument("generator spec: sequences must be >= 1");
    if (length.min < 1) throw std::invalid_argument("generator spec: length.min must be >= 1");
    if (length.max < length.min) throw std::invalid_argument("generator spec: length.max < min");
    if (initial.size() != n) throw std::invalid_argument("generator spec: initial size != |X|");
    if (transition.size() != n) throw std::invalid_argument("generator spec: transition rows != |X|");

    auto check_row = [&](std::span<const double> row, const std::string& name) {
        if (row.size() != n) throw std::invalid_argument("generator spec: " + name + " size != |X|");
        double sum = 0.0;
        for (double p : row) {
            if (p < 0.0) throw std::invalid_argument("generator spec: negative prob in " + name);
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("generator spec: " + name + " does not sum to 1");
    };
    check_row(initial, "initial");
    for (size_t i = 0; i < n; ++i) check_row(transition[i], "transition[" + std::to_string(i) + "]");

    std::unordered_set<std::string> seen;
    for (const auto& id : event_ids)
        if (!seen.insert(id).second)
            throw std::invalid_argument("generator spec: duplicate event id '" + id + "'");

    double theme_total = 0.0;
    for (const auto& theme : themes) {
        theme_total += theme.prob;
        for (const auto& slot : theme.slots) {
            if (slot.events.empty())
                throw std::invalid_argument("generator spec: empty theme slot");
            if (slot.include_prob < 0.0 || slot.include_prob > 1.0)
                throw std::invalid_argument("generator spec: slot include_prob out of range");
            for (int32_t e : slot.events)
                if (e < 0 || static_cast<size_t>(e) >= n)
                    throw std::invalid_argument("generator spec: slot event out of range");
        }
    }
    if (theme_total > 1.0 + 1e-9)
        throw std::invalid_argument("generator spec: theme probabilities exceed 1");

    seen.clear();
    for (const auto& label : labels) {
        if (!seen.insert(label.id).second)
            throw std::invalid_argument("generator spec: duplicate label id '" + label.id + "'");
        if (!label.rule) continue;
        for (const auto& v : extract_variables(*label.rule))
            if (std::find(event_ids.begin(), event_ids.end(), v) == event_ids.end())
                throw std::invalid_argument("generator spec: rule variable '" + v +
                                            "' not in vocabulary");
    }
}

namespace {

const char* kSubsystems[] = {"powertrain", "battery", "brake", "steering", "body",
                             "infotainment", "gateway", "hvac"};
const char* kModelRanges[] = {"sedan_a", "sedan_b", "suv_c", "suv_d", "touring_e", "compact_f"};

std::string desk_event_id(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0X%04X", i + 1);
    return buf;
}

// Planted rule shapes, cycled across labels. Sizes are the number of
// reserved events each shape consumes.
enum class RuleShape { Single, And2, And2Not, Or2And, And3, Or2, Mixed, AndNot };

constexpr RuleShape kShapeCycle[] = {RuleShape::Single, RuleShape::And2,  RuleShape::And2Not,
                                     RuleShape::Or2And, RuleShape::And3,  RuleShape::Or2,
                                     RuleShape::Mixed,  RuleShape::AndNot};

int shape_arity(RuleShape s) {
    switch (s) {
        case RuleShape::Single: return 1;
        case RuleShape::And2: return 2;
        case RuleShape::And2Not: return 3;
        case RuleShape::Or2And: return 3;
        case RuleShape::And3: return 3;
        case RuleShape::Or2: return 2;
        case RuleShape::Mixed: return 5;
        case RuleShape::AndNot: return 2;
    }
    return 1;
}

}  // namespace

GeneratorSpec desk_spec(const DeskSpecParams& params) {
    if (params.events < 32) throw std::invalid_argument("desk spec: need at least 32 events");
    if (params.labels < 1) throw std::invalid_argument("desk spec: need at least 1 label");

    GeneratorSpec spec;
    spec.seed = params.seed;
    spec.sequences = params.sequences;
    spec.length = params.length;
    spec.theme_boost = 55.0;

    const int n = params.events;
    spec.event_ids.reserve(static_cast<size_t>(n));
    spec.event_descriptions.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        spec.event_ids.push_back(desk_event_id(i));
        spec.event_descriptions.push_back(std::string("Fault code ") + desk_event_id(i) + " (" +
                                          kSubsystems[i % 8] + ")");
    }

    // Rules and themes, one theme per label. Theme probabilities follow a
    // geometric decay so label supports come out long-tailed.
    Rng rng(derive_seed(params.seed, "desk-spec"));
    int next_event = 0;
    std::vector<bool> reserved(static_cast<size_t>(n), false);
    const double p0 = 0.148, decay = 0.85;
    for (int k = 0; k < params.labels; ++k) {
        const RuleShape shape = kShapeCycle[k % 8];
        const int arity = shape_arity(shape);
        if (next_event + arity + 1 >= n)
            throw std::invalid_argument("desk spec: not enough events for the requested labels");
        std::vector<std::string> v;
        std::vector<int32_t> vt;
        for (int a = 0; a < arity; ++a) {
            v.push_back(spec.event_ids[static_cast<size_t>(next_event)]);
            vt.push_back(next_event);
            reserved[static_cast<size_t>(next_event)] = true;
            ++next_event;
        }

        RuleAst rule;
        FaultTheme theme;
        theme.prob = p0 * std::pow(decay, k);
        switch (shape) {
            case RuleShape::Single:
                rule = make_var(v[0]);
                theme.slots.push_back({{vt[0]}, 1.0});
                break;
            case RuleShape::And2:
                rule = make_and({make_var(v[0]), make_var(v[1])});
                theme.slots.push_back({{vt[0]}, 1.0});
                theme.slots.push_back({{vt[1]}, 1.0});
                break;
            case RuleShape::And2Not:
                rule = make_and({make_var(v[0]), make_var(v[1]), make_not(make_var(v[2]))});
                theme.slots.push_back({{vt[0]}, 1.0});
                theme.slots.push_back({{vt[1]}, 1.0});
                theme.slots.push_back({{vt[2]}, 0.5});  // inhibitor present in half the theme runs
                break;
            case RuleShape::Or2And:
                rule = make_and({make_or({make_var(v[0]), make_var(v[1])}), make_var(v[2])});
                theme.slots.push_back({{vt[0], vt[1]}, 1.0});  // exclusive pair
                theme.slots.push_back({{vt[2]}, 1.0});
                break;
            case RuleShape::And3:
                rule = make_and({make_var(v[0]), make_var(v[1]), make_var(v[2])});
                for (int a = 0; a < 3; ++a) theme.slots.push_back({{vt[static_cast<size_t>(a)]}, 1.0});
                break;
            case RuleShape::Or2:
                rule = make_or({make_var(v[0]), make_var(v[1])});
                theme.slots.push_back({{vt[0], vt[1]}, 1.0});
                break;
            case RuleShape::Mixed:
                rule = make_and({make_var(v[0]), make_var(v[1]),
                                 make_or({make_var(v[2]), make_var(v[3])}),
                                 make_not(make_var(v[4]))});
                theme.slots.push_back({{vt[0]}, 1.0});
                theme.slots.push_back({{vt[1]}, 1.0});
                theme.slots.push_back({{vt[2], vt[3]}, 1.0});
                theme.slots.push_back({{vt[4]}, 0.5});
                break;
            case RuleShape::AndNot:
                rule = make_and({make_var(v[0]), make_not(make_var(v[1]))});
                theme.slots.push_back({{vt[0]}, 1.0});
                theme.slots.push_back({{vt[1]}, 0.5});
                break;
        }

        // A couple of themes carry a boosted flavor event that is not part of
        // the rule, so discovery has to reject correlated non-causes.
        if (k % 5 == 1) {
            theme.slots.push_back({{next_event}, 0.9});
            reserved[static_cast<size_t>(next_event)] = true;
            ++next_event;
        }

        char label_id[16];
        std::snprintf(label_id, sizeof(label_id), "ep_%02d", k + 1);
        spec.labels.push_back({label_id, std::move(rule),
                               std::string("Error pattern ") + label_id + " over " +
                                   kSubsystems[k % 8] + " fault codes"});
        spec.themes.push_back(std::move(theme));
    }

    // Base emission model: mildly non-uniform rows; rule-reserved events get
    // a low base weight so their co-occurrence is driven by themes, not noise.
    const auto base_weight = [&](int j, Rng& r) {
        const double w = 0.75 + 0.5 * r.next_double();
        return reserved[static_cast<size_t>(j)] ? 0.3 * w : w;
    };
    spec.initial.resize(static_cast<size_t>(n));
    {
        Rng r0(derive_seed(params.seed, "desk-initial"));
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += (spec.initial[static_cast<size_t>(j)] = base_weight(j, r0));
        for (auto& p : spec.initial) p /= sum;
    }
    spec.transition.assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n)));
    for (int i = 0; i < n; ++i) {
        Rng r(derive_seed(params.seed, 0x7000 + static_cast<uint64_t>(i)));
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += (spec.transition[static_cast<size_t>(i)][static_cast<size_t>(j)] = base_weight(j, r));
        for (auto& p : spec.transition[static_cast<size_t>(i)]) p /= sum;
    }

    spec.validate();
    return spec;
}

namespace {

// Weights for one draw: base row with the active-theme members boosted.
void boosted_weights(std::span<const double> row, std::span<const uint8_t> active, double boost,
                     std::vector<double>& out) {
    out.resize(row.size());
    for (size_t j = 0; j < row.size(); ++j) out[j] = active[j] ? row[j] * boost : row[j];
}

}  // namespace

Dataset generate_dataset(const GeneratorSpec& spec) {
    spec.validate();
    Dataset ds;
    ds.vocabulary.ids = spec.event_ids;
    ds.vocabulary.descriptions = spec.event_descriptions.empty()
                                     ? std::vector<std::string>(spec.event_ids.size())
                                     : spec.event_descriptions;
    ds.vocabulary.rebuild_index();
    ds.catalog.labels = spec.labels;

    const size_t n = spec.vocab_size();
    std::vector<double> theme_probs;
    theme_probs.reserve(spec.themes.size() + 1);
    double rest = 1.0;
    for (const auto& t : spec.themes) {
        theme_probs.push_back(t.prob);
        rest -= t.prob;
    }
    theme_probs.push_back(std::max(0.0, rest));  // last entry = no theme

    ds.sequences.reserve(static_cast<size_t>(spec.sequences));
    std::vector<uint8_t> active(n);
    std::vector<double> weights;
    for (int k = 0; k < spec.sequences; ++k) {
        Rng srng(derive_seed(spec.seed, 0x100000ULL + static_cast<uint64_t>(k)));
        LabeledSequence seq;

        const int len = std::clamp(static_cast<int>(std::lround(srng.normal(spec.length.mean, spec.length.stddev))),
                                   spec.length.min, spec.length.max);

        std::fill(active.begin(), active.end(), 0);
        const size_t theme_idx = srng.weighted_index(theme_probs);
        if (theme_idx < spec.themes.size()) {
            for (const auto& slot : spec.themes[theme_idx].slots) {
                if (slot.events.size() > 1) {
                    const auto pick = static_cast<size_t>(
                        srng.uniform_int(0, static_cast<int64_t>(slot.events.size()) - 1));
                    active[static_cast<size_t>(slot.events[pick])] = 1;
                } else if (srng.next_double() < slot.include_prob) {
                    active[static_cast<size_t>(slot.events[0])] = 1;
                }
            }
        }

        double t = 0.0;
        int32_t prev = -1;
        seq.events.reserve(static_cast<size_t>(len));
        for (int i = 0; i < len; ++i) {
            const std::span<const double> row =
                prev < 0 ? std::span<const double>(spec.initial)
                         : std::span<const double>(spec.transition[static_cast<size_t>(prev)]);
            boosted_weights(row, active, spec.theme_boost, weights);
            const auto tok = static_cast<int32_t>(srng.weighted_index(weights));
            t += srng.exponential(1.0);
            seq.events.push_back({t, ds.vocabulary.ids[static_cast<size_t>(tok)]});
            prev = tok;
        }

        char sid[16];
        std::snprintf(sid, sizeof(sid), "s%06d", k);
        char ccm[8];
        std::snprintf(ccm, sizeof(ccm), "%03d", static_cast<int>(srng.uniform_int(100, 999)));
        seq.meta["sid"] = sid;
        seq.meta["model"] = kModelRanges[srng.uniform_int(0, 5)];
        seq.meta["ccm"] = ccm;

        ds.sequences.push_back(std::move(seq));
    }

    label_sequences(ds.catalog, ds.sequences);
    return ds;
}

void label_sequences(const LabelCatalog& catalog, std::vector<LabeledSequence>& sequences) {
    for (const auto& label : catalog.labels)
        if (!label.rule)
            throw std::invalid_argument("label_sequences: label '" + label.id + "' is masked");
    for (auto& seq : sequences) {
        const auto present = seq.presence();
        seq.labels.resize(catalog.size());
        for (size_t j = 0; j < catalog.size(); ++j)
            seq.labels[j] = eval_rule(*catalog.labels[j].rule, present) ? 1 : 0;
    }
}

std::pair<LabelCatalog, std::map<std::string, RuleAst>> mask_labels(const Dataset& dataset, int k,
                                                                    int min_support,
                                                                    uint64_t seed) {
    const std::vector<int> supports = dataset.label_supports();
    std::vector<size_t> eligible;
    for (size_t j = 0; j < dataset.catalog.size(); ++j)
        if (supports[j] >= min_support && dataset.catalog.labels[j].rule) eligible.push_back(j);
    if (static_cast<int>(eligible.size()) < k)
        throw DataError("mask_labels: only " + std::to_string(eligible.size()) +
                        " labels with support >= " + std::to_string(min_support) +
                        ", need " + std::to_string(k));

    Rng rng(derive_seed(seed, "mask-labels"));
    rng.shuffle(eligible);
    eligible.resize(static_cast<size_t>(k));

    LabelCatalog masked = dataset.catalog;
    std::map<std::string, RuleAst> hidden;
    for (size_t j : eligible) {
        hidden.emplace(masked.labels[j].id, *masked.labels[j].rule);
        masked.labels[j].rule.reset();
    }
    return {std::move(masked), std::move(hidden)};
}

std::pair<LabelCatalog, std::map<std::string, RuleAst>> mask_specific(
    const Dataset& dataset, const std::vector<std::string>& label_ids) {
    LabelCatalog masked = dataset.catalog;
    std::map<std::string, RuleAst> hidden;
    for (const auto& id : label_ids) {
        const int j = masked.index_of(id);
        if (j < 0) throw DataError("mask_specific: unknown label '" + id + "'");
        if (!masked.labels[static_cast<size_t>(j)].rule)
            throw DataError("mask_specific: label '" + id + "' already masked");
        hidden.emplace(id, *masked.labels[static_cast<size_t>(j)].rule);
        masked.labels[static_cast<size_t>(j)].rule.reset();
    }
    return {std::move(masked), std::move(hidden)};
}

// --- persistence -------------------------------------------------------

void save_dataset(const Dataset& dataset, const DatasetPaths& paths) {
    {
        std::ofstream out(paths.sequences);
        if (!out) throw DataError("cannot write " + paths.sequences);
        for (const auto& seq : dataset.sequences) {
            ordered_json line;
            auto& events = line["events"] = ordered_json::array();
            for (const auto& e : seq.events) events.push_back({{"t", e.t}, {"id", e.id}});
            auto& labels = line["labels"] = ordered_json::array();
            for (size_t j = 0; j < dataset.catalog.size(); ++j)
                if (seq.labels[j]) labels.push_back(dataset.catalog.labels[j].id);
            line["meta"] = seq.meta;
            out << line.dump() << '\n';
        }
    }
    {
        ordered_json catalog;
        for (const auto& label : dataset.catalog.labels) {
            ordered_json entry;
            entry["rule"] = label.rule ? ordered_json(render_rule(*label.rule)) : ordered_json(nullptr);
            entry["description"] = label.description;
            catalog[label.id] = std::move(entry);
        }
        std::ofstream out(paths.catalog);
        if (!out) throw DataError("cannot write " + paths.catalog);
        out << catalog.dump(2) << '\n';
    }
    {
        ordered_json vocab;
        for (size_t i = 0; i < dataset.vocabulary.ids.size(); ++i)
            vocab[dataset.vocabulary.ids[i]] = dataset.vocabulary.descriptions[i];
        std::ofstream out(paths.vocabulary);
        if (!out) throw DataError("cannot write " + paths.vocabulary);
        out << vocab.dump(2) << '\n';
    }
}

Dataset load_dataset(const DatasetPaths& paths) {
    Dataset ds;
    {
        std::ifstream in(paths.vocabulary);
        if (!in) throw DataError("cannot read " + paths.vocabulary);
        ordered_json vocab;
        try {
            in >> vocab;
        } catch (const std::exception& e) {
            throw DataError(paths.vocabulary + ": " + e.what());
        }
        for (auto it = vocab.begin(); it != vocab.end(); ++it) {
            ds.vocabulary.ids.push_back(it.key());
            ds.vocabulary.descriptions.push_back(it.value().get<std::string>());
        }
        ds.vocabulary.rebuild_index();
    }
    {
        std::ifstream in(paths.catalog);
        if (!in) throw DataError("cannot read " + paths.catalog);
        ordered_json catalog;
        try {
            in >> catalog;
        } catch (const std::exception& e) {
            throw DataError(paths.catalog + ": " + e.what());
        }
        for (auto it = catalog.begin(); it != catalog.end(); ++it) {
            LabelDef def;
            def.id = it.key();
            const auto& entry = it.value();
            if (!entry.contains("rule"))
                throw DataError(paths.catalog + ": label '" + def.id + "' missing rule field");
            if (!entry["rule"].is_null()) def.rule = parse_rule(entry["rule"].get<std::string>());
            def.description = entry.value("description", "");
            ds.catalog.labels.push_back(std::move(def));
        }
    }
    {
        std::ifstream in(paths.sequences);
        if (!in) throw DataError("cannot read " + paths.sequences);
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            ordered_json rec;
            try {
                rec = ordered_json::parse(line);
            } catch (const std::exception& e) {
                throw DataError(paths.sequences + " line " + std::to_string(line_no) + ": " +
                                e.what());
            }
            LabeledSequence seq;
            try {
                double prev_t = -1.0;
                for (const auto& e : rec.at("events")) {
                    TimedEvent ev{e.at("t").get<double>(), e.at("id").get<std::string>()};
                    if (ds.vocabulary.token_of(ev.id) < 0)
                        throw DataError("event '" + ev.id + "' not in vocabulary");
                    if (ev.t < prev_t) throw DataError("timestamps not nondecreasing");
                    prev_t = ev.t;
                    seq.events.push_back(std::move(ev));
                }
                seq.labels.assign(ds.catalog.size(), 0);
                for (const auto& l : rec.at("labels")) {
                    const int j = ds.catalog.index_of(l.get<std::string>());
                    if (j < 0) throw DataError("label '" + l.get<std::string>() + "' not in catalog");
                    seq.labels[static_cast<size_t>(j)] = 1;
                }
                if (rec.contains("meta"))
                    for (auto it = rec["meta"].begin(); it != rec["meta"].end(); ++it)
                        seq.meta[it.key()] = it.value().get<std::string>();
            } catch (const DataError&) {
                throw;
            } catch (const std::exception& e) {
                throw DataError(paths.sequences + " line " + std::to_string(line_no) + ": " +
                                e.what());
            }
            ds.sequences.push_back(std::move(seq));
        }
    }
    return ds;
}

std::string generator_spec_to_json(const GeneratorSpec& spec) {
    ordered_json j;
    j["events"] = spec.event_ids;
    j["event_descriptions"] = spec.event_descriptions;
    auto& labels = j["labels"] = ordered_json::array();
    for (const auto& label : spec.labels) {
        labels.push_back({{"id", label.id},
                          {"rule", label.rule ? ordered_json(render_rule(*label.rule))
                                              : ordered_json(nullptr)},
                          {"description", label.description}});
    }
    j["sequences"] = spec.sequences;
    j["length"] = {{"mean", spec.length.mean},
                   {"std", spec.length.stddev},
                   {"min", spec.length.min},
                   {"max", spec.length.max}};
    j["initial"] = spec.initial;
    j["transition"] = spec.transition;
    auto& themes = j["themes"] = ordered_json::array();
    for (const auto& theme : spec.themes) {
        ordered_json tj;
        tj["prob"] = theme.prob;
        auto& slots = tj["slots"] = ordered_json::array();
        for (const auto& slot : theme.slots)
            slots.push_back({{"events", slot.events}, {"include_prob", slot.include_prob}});
        themes.push_back(std::move(tj));
    }
    j["theme_boost"] = spec.theme_boost;
    j["seed"] = spec.seed;
    return j.dump();
}

GeneratorSpec generator_spec_from_json(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw DataError(std::string("generator spec: ") + e.what());
    }
    GeneratorSpec spec;
    spec.event_ids = j.at("events").get<std::vector<std::string>>();
    spec.event_descriptions = j.value("event_descriptions", std::vector<std::string>{});
    if (spec.event_descriptions.empty()) spec.event_descriptions.resize(spec.event_ids.size());
    for (const auto& label : j.at("labels")) {
        LabelDef def;
        def.id = label.at("id").get<std::string>();
        if (!label.at("rule").is_null()) def.rule = parse_rule(label.at("rule").get<std::string>());
        def.description = label.value("description", "");
        spec.labels.push_back(std::move(def));
    }
    spec.sequences = j.at("sequences").get<int>();
    const auto& len = j.at("length");
    spec.length = {len.at("mean").get<double>(), len.at("std").get<double>(),
                   len.at("min").get<int>(), len.at("max").get<int>()};
    spec.initial = j.at("initial").get<std::vector<double>>();
    spec.transition = j.at("transition").get<std::vector<std::vector<double>>>();
    for (const auto& theme : j.at("themes")) {
        FaultTheme t;
        t.prob = theme.at("prob").get<double>();
        for (const auto& slot : theme.at("slots"))
            t.slots.push_back({slot.at("events").get<std::vector<int32_t>>(),
                               slot.at("include_prob").get<double>()});
        spec.themes.push_back(std::move(t));
    }
    spec.theme_boost = j.value("theme_boost", 55.0);
    spec.seed = j.at("seed").get<uint64_t>();
    spec.validate();
    return spec;
}

}  // namespace epmine
