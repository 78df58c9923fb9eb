#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "epmine/rule.hpp"

namespace epmine {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EventVocabulary {
    std::vector<std::string> ids;           // ordered event alphabet
    std::vector<std::string> descriptions;  // parallel to ids ("" allowed)

    int32_t token_of(const std::string& id) const {
        const auto it = index_.find(id);
        return it == index_.end() ? -1 : it->second;
    }
    size_t size() const { return ids.size(); }
    void rebuild_index();

private:
    std::unordered_map<std::string, int32_t> index_;
};

struct LabelDef {
    std::string id;
    std::optional<RuleAst> rule;  // nullopt = MASKED (rule withheld)
    std::string description;
};

struct LabelCatalog {
    std::vector<LabelDef> labels;

    int index_of(const std::string& id) const {
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i].id == id) return static_cast<int>(i);
        return -1;
    }
    size_t size() const { return labels.size(); }
};

struct TimedEvent {
    double t = 0.0;
    std::string id;
    bool operator==(const TimedEvent&) const = default;
};

struct LabeledSequence {
    std::vector<TimedEvent> events;            // nondecreasing timestamps
    std::vector<uint8_t> labels;               // multi-hot, catalog order, attached at t_L
    std::map<std::string, std::string> meta;   // e.g. sid, model, ccm

    std::unordered_set<std::string> presence() const {
        std::unordered_set<std::string> out;
        for (const auto& e : events) out.insert(e.id);
        return out;
    }
    const std::string& sid() const {
        static const std::string empty;
        const auto it = meta.find("sid");
        return it == meta.end() ? empty : it->second;
    }
    bool operator==(const LabeledSequence&) const = default;
};

struct Dataset {
    EventVocabulary vocabulary;
    LabelCatalog catalog;
    std::vector<LabeledSequence> sequences;

    // Count of sequences where each label bit is set.
    std::vector<int> label_supports() const;
    std::map<std::string, int> label_supports_by_id() const;
};

// Integer view of a sequence for the estimator/discovery hot paths.
struct TokenizedSequence {
    std::string sid;
    std::vector<int32_t> tokens;
    std::vector<uint8_t> labels;
};

std::vector<TokenizedSequence> tokenize(const Dataset& dataset);

// --- synthetic fleet generation ---------------------------------------

struct LengthModel {
    double mean = 40.0;
    double stddev = 10.0;
    int min = 20;
    int max = 80;
};

// One boosted component of a fault theme. A single-event slot joins the
// active set with probability include_prob; a multi-event slot is an
// exclusive group: exactly one member is chosen per activation.
struct ThemeSlot {
    std::vector<int32_t> events;
    double include_prob = 1.0;
};

struct FaultTheme {
    double prob = 0.0;  // probability this theme drives a sequence
    std::vector<ThemeSlot> slots;
};

struct GeneratorSpec {
    std::vector<std::string> event_ids;
    std::vector<std::string> event_descriptions;
    std::vector<LabelDef> labels;  // planted ground-truth rules
    int sequences = 5000;
    LengthModel length;
    std::vector<double> initial;                   // |X|, sums to 1
    std::vector<std::vector<double>> transition;   // |X| x |X|, rows sum to 1
    std::vector<FaultTheme> themes;
    double theme_boost = 55.0;  // weight multiplier for active-theme events
    uint64_t seed = 0;

    size_t vocab_size() const { return event_ids.size(); }
    void validate() const;  // throws std::invalid_argument on violations
};

struct DeskSpecParams {
    int events = 200;
    int labels = 20;
    int sequences = 5000;
    LengthModel length;
    uint64_t seed = 1;
};

// Default desk-scale fleet: long-tail label supports, per-sequence fault
// themes that make planted And/Or/Not structure statistically recoverable.
GeneratorSpec desk_spec(const DeskSpecParams& params = {});

Dataset generate_dataset(const GeneratorSpec& spec);

// Re-evaluate all rules over each sequence's presence set. Throws on masked
// rules.
void label_sequences(const LabelCatalog& catalog, std::vector<LabeledSequence>& sequences);

// Withhold k rules (support >= min_support) chosen by seed. Label occurrence
// bits in the sequences are kept. Returns the masked catalog and the hidden
// ground-truth rules.
std::pair<LabelCatalog, std::map<std::string, RuleAst>> mask_labels(const Dataset& dataset, int k,
                                                                    int min_support,
                                                                    uint64_t seed);
// Same, but with an explicit label choice.
std::pair<LabelCatalog, std::map<std::string, RuleAst>> mask_specific(
    const Dataset& dataset, const std::vector<std::string>& label_ids);

// --- persistence -------------------------------------------------------

struct DatasetPaths {
    std::string sequences;   // JSONL, one sequence per line
    std::string catalog;     // JSON map label-id -> {rule, description}
    std::string vocabulary;  // JSON map event-id -> description
};

void save_dataset(const Dataset& dataset, const DatasetPaths& paths);
Dataset load_dataset(const DatasetPaths& paths);

std::string generator_spec_to_json(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json(const std::string& json_text);

}  // namespace epmine
