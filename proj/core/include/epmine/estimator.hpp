#pragma once

#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "epmine/data.hpp"

namespace epmine {

// The two conditional-probability services behind discovery: the next-event
// distribution P(X_i | Z) and per-label probabilities P(Y_j = 1 | prefix).
// Implementations are immutable after construction and pure in the prefix,
// so handles can be shared across workers.
class Estimator {
public:
    virtual ~Estimator() = default;

    virtual std::string kind() const = 0;
    virtual size_t vocab_size() const = 0;
    virtual size_t label_count() const = 0;

    // Distribution over the next event given the prefix; nonnegative,
    // sums to 1 (within 1e-9).
    virtual std::vector<double> next_event_dist(std::span<const int32_t> prefix) const = 0;

    // Probability each label is present at the end of the sequence, given
    // the prefix observed so far; elementwise in [0, 1].
    virtual std::vector<double> label_probs(std::span<const int32_t> prefix) const = 0;
};

struct NgramConfig {
    int order = 3;          // condition on up to order-1 predecessors
    double alpha = 0.1;     // additive smoothing per event
    int prefix_cuts = 4;    // label-model training prefixes sampled per sequence
    int epochs = 20;
    double learning_rate = 0.2;
    double l2 = 1e-4;
    uint64_t seed = 1;
};

// Back-off interpolated n-gram next-event model plus a per-label logistic
// model over prefix event-presence features. Masked labels keep their
// occurrence bits, so they are ordinary training targets.
class NgramEstimator final : public Estimator {
public:
    static std::unique_ptr<NgramEstimator> fit(const Dataset& dataset, const NgramConfig& config);

    std::string kind() const override { return "ngram"; }
    size_t vocab_size() const override { return vocab_.size(); }
    size_t label_count() const override { return label_ids_.size(); }
    std::vector<double> next_event_dist(std::span<const int32_t> prefix) const override;
    std::vector<double> label_probs(std::span<const int32_t> prefix) const override;

    const NgramConfig& config() const { return config_; }
    const std::vector<std::string>& event_ids() const { return vocab_; }
    const std::vector<std::string>& label_ids() const { return label_ids_; }

    std::string to_json() const;
    static std::unique_ptr<NgramEstimator> from_json(const std::string& text);

private:
    friend class EstimatorIo;
    NgramConfig config_;
    std::vector<std::string> vocab_;
    std::vector<std::string> label_ids_;
    // counts_[len] maps a packed context of `len` tokens to successor counts
    std::vector<std::unordered_map<uint64_t, std::unordered_map<int32_t, int32_t>>> counts_;
    std::vector<std::unordered_map<uint64_t, int64_t>> totals_;
    std::vector<double> base_;                  // smoothed unigram distribution
    std::vector<std::vector<double>> weights_;  // [label][event]
    std::vector<double> bias_;                  // [label]
};

// Ground-truth estimator for synthetic fleets: next-event probabilities come
// from the generative model's hypothesis posterior (theme, slot choices),
// label probabilities from seeded Monte-Carlo completions of the prefix.
class RolloutOracle final : public Estimator {
public:
    RolloutOracle(GeneratorSpec spec, int rollouts, uint64_t seed);

    std::string kind() const override { return "rollout-oracle"; }
    size_t vocab_size() const override { return spec_.vocab_size(); }
    size_t label_count() const override { return spec_.labels.size(); }
    std::vector<double> next_event_dist(std::span<const int32_t> prefix) const override;
    std::vector<double> label_probs(std::span<const int32_t> prefix) const override;

    const GeneratorSpec& spec() const { return spec_; }
    int rollouts() const { return rollouts_; }
    uint64_t seed() const { return seed_; }

    // Exposed for calibration tests: label probabilities with an explicit
    // rollout budget.
    std::vector<double> label_probs_with_rollouts(std::span<const int32_t> prefix,
                                                  int rollouts) const;

private:
    std::vector<double> hypothesis_posterior(std::span<const int32_t> prefix) const;

    GeneratorSpec spec_;
    int rollouts_;
    uint64_t seed_;

    struct Hypothesis {
        double prior;
        std::vector<uint8_t> active;             // boosted-member flags
        std::vector<double> initial_cdf;         // |X|
        std::vector<std::vector<double>> cdf;    // |X| x |X| cumulative rows
    };
    std::vector<Hypothesis> hypotheses_;
    std::vector<CompiledRule> rules_;  // catalog order, token-compiled
};

std::unique_ptr<Estimator> build_rollout_oracle(const GeneratorSpec& spec, int rollouts,
                                                uint64_t seed);

// Regenerate the tail of `prefix` (everything past `anchor_len`) N times by
// iterative draws from the estimator's next-event distribution, filtered to
// the top_k most probable events and truncated to the smallest set with
// cumulative mass >= top_p. Returns N prefixes of the original length.
std::vector<std::vector<int32_t>> sample_contexts(const Estimator& estimator,
                                                  std::span<const int32_t> prefix, int anchor_len,
                                                  int n_samples, int top_k, double top_p,
                                                  uint64_t seed);

// --- persistence -------------------------------------------------------

void save_estimator(const Estimator& estimator, const std::string& path);
std::unique_ptr<Estimator> load_estimator(const std::string& path);

}  // namespace epmine
