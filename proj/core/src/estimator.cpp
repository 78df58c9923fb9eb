#include "epmine/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "epmine/rng.hpp"

namespace epmine {

using ordered_json = nlohmann::ordered_json;

namespace {

// Pack up to 4 tokens (vocab < 65536) into one key.
uint64_t pack_context(std::span<const int32_t> ctx) {
    uint64_t key = 1;  // length marker keeps (a) distinct from (0, a)
    for (int32_t t : ctx) key = (key << 16) | static_cast<uint16_t>(t);
    return key;
}

std::vector<double> sigmoid_scores(std::span<const int32_t> prefix,
                                   const std::vector<std::vector<double>>& weights,
                                   const std::vector<double>& bias, size_t vocab_size) {
    std::vector<uint8_t> present(vocab_size, 0);
    std::vector<int32_t> distinct;
    distinct.reserve(prefix.size());
    for (int32_t t : prefix) {
        if (t >= 0 && static_cast<size_t>(t) < vocab_size && !present[static_cast<size_t>(t)]) {
            present[static_cast<size_t>(t)] = 1;
            distinct.push_back(t);
        }
    }
    std::vector<double> probs(weights.size());
    for (size_t j = 0; j < weights.size(); ++j) {
        double logit = bias[j];
        for (int32_t t : distinct) logit += weights[j][static_cast<size_t>(t)];
        probs[j] = 1.0 / (1.0 + std::exp(-logit));
    }
    return probs;
}

}  // namespace

std::unique_ptr<NgramEstimator> NgramEstimator::fit(const Dataset& dataset,
                                                    const NgramConfig& config) {
    if (dataset.sequences.empty()) throw std::invalid_argument("fit_ngram: empty dataset");
    if (config.order < 1) throw std::invalid_argument("fit_ngram: order must be >= 1");
    if (config.order > 4) throw std::invalid_argument("fit_ngram: order capped at 4");

    auto est = std::unique_ptr<NgramEstimator>(new NgramEstimator());
    est->config_ = config;
    est->vocab_ = dataset.vocabulary.ids;
    for (const auto& label : dataset.catalog.labels) est->label_ids_.push_back(label.id);

    const size_t n = est->vocab_.size();
    const auto tokenized = tokenize(dataset);

    // next-event counts for context lengths 0 .. order-1
    const int max_ctx = config.order - 1;
    est->counts_.resize(static_cast<size_t>(max_ctx) + 1);
    est->totals_.resize(static_cast<size_t>(max_ctx) + 1);
    std::vector<int64_t> unigram(n, 0);
    int64_t total_events = 0;
    for (const auto& seq : tokenized) {
        const auto& toks = seq.tokens;
        for (size_t i = 0; i < toks.size(); ++i) {
            ++unigram[static_cast<size_t>(toks[i])];
            ++total_events;
            for (int len = 1; len <= max_ctx; ++len) {
                if (i < static_cast<size_t>(len)) break;
                const auto ctx = std::span<const int32_t>(toks).subspan(i - static_cast<size_t>(len),
                                                                        static_cast<size_t>(len));
                const uint64_t key = pack_context(ctx);
                ++est->counts_[static_cast<size_t>(len)][key][toks[i]];
                ++est->totals_[static_cast<size_t>(len)][key];
            }
        }
    }
    est->base_.resize(n);
    const double denom = static_cast<double>(total_events) + config.alpha * static_cast<double>(n);
    for (size_t e = 0; e < n; ++e)
        est->base_[e] = (static_cast<double>(unigram[e]) + config.alpha) / denom;

    // Label model: logistic regression on prefix presence features. Training
    // examples are random prefix cuts plus the full sequence, so queries on
    // partial prefixes are calibrated.
    struct Example {
        std::vector<int32_t> distinct;
        const std::vector<uint8_t>* labels;
    };
    std::vector<Example> examples;
    examples.reserve(tokenized.size() * static_cast<size_t>(config.prefix_cuts + 1));
    std::vector<uint8_t> seen(n);
    auto add_example = [&](const TokenizedSequence& seq, size_t cut) {
        std::fill(seen.begin(), seen.end(), 0);
        Example ex;
        ex.labels = &seq.labels;
        for (size_t i = 0; i < cut; ++i) {
            const auto t = static_cast<size_t>(seq.tokens[i]);
            if (!seen[t]) {
                seen[t] = 1;
                ex.distinct.push_back(seq.tokens[i]);
            }
        }
        examples.push_back(std::move(ex));
    };
    for (size_t k = 0; k < tokenized.size(); ++k) {
        const auto& seq = tokenized[k];
        if (seq.tokens.empty()) continue;
        add_example(seq, seq.tokens.size());
        Rng cut_rng(derive_seed(config.seed, 0x20000ULL + k));
        for (int c = 0; c < config.prefix_cuts; ++c)
            add_example(seq, static_cast<size_t>(cut_rng.uniform_int(
                                 1, static_cast<int64_t>(seq.tokens.size()))));
    }

    const size_t n_labels = est->label_ids_.size();
    est->weights_.assign(n_labels, std::vector<double>(n, 0.0));
    est->bias_.assign(n_labels, 0.0);

    std::vector<size_t> order_idx(examples.size());
    std::iota(order_idx.begin(), order_idx.end(), 0);
    Rng shuffle_rng(derive_seed(config.seed, "label-sgd"));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order_idx);
        const double lr = config.learning_rate / (1.0 + 0.3 * epoch);
        for (const size_t idx : order_idx) {
            const Example& ex = examples[idx];
            for (size_t j = 0; j < n_labels; ++j) {
                double logit = est->bias_[j];
                auto& w = est->weights_[j];
                for (int32_t t : ex.distinct) logit += w[static_cast<size_t>(t)];
                const double p = 1.0 / (1.0 + std::exp(-logit));
                const double grad = static_cast<double>((*ex.labels)[j]) - p;
                est->bias_[j] += lr * grad;
                for (int32_t t : ex.distinct) {
                    auto& wt = w[static_cast<size_t>(t)];
                    wt += lr * (grad - config.l2 * wt);
                }
            }
        }
    }
    return est;
}

std::vector<double> NgramEstimator::next_event_dist(std::span<const int32_t> prefix) const {
    std::vector<double> dist = base_;
    const double beta = config_.alpha * static_cast<double>(vocab_.size());
    const int max_ctx = config_.order - 1;
    for (int len = 1; len <= max_ctx; ++len) {
        if (prefix.size() < static_cast<size_t>(len)) break;
        const uint64_t key = pack_context(prefix.subspan(prefix.size() - static_cast<size_t>(len)));
        const auto tot_it = totals_[static_cast<size_t>(len)].find(key);
        if (tot_it == totals_[static_cast<size_t>(len)].end()) break;
        const double total = static_cast<double>(tot_it->second);
        const double scale = beta / (total + beta);
        for (auto& p : dist) p *= scale;
        for (const auto& [tok, cnt] : counts_[static_cast<size_t>(len)].at(key))
            dist[static_cast<size_t>(tok)] += static_cast<double>(cnt) / (total + beta);
    }
    return dist;
}

std::vector<double> NgramEstimator::label_probs(std::span<const int32_t> prefix) const {
    return sigmoid_scores(prefix, weights_, bias_, vocab_.size());
}

// --- rollout oracle ----------------------------------------------------

RolloutOracle::RolloutOracle(GeneratorSpec spec, int rollouts, uint64_t seed)
    : spec_(std::move(spec)), rollouts_(rollouts), seed_(seed) {
    if (rollouts_ < 1) throw std::invalid_argument("rollout oracle: rollouts must be >= 1");
    spec_.validate();
    const size_t n = spec_.vocab_size();

    std::unordered_map<std::string, int32_t> index;
    for (size_t i = 0; i < spec_.event_ids.size(); ++i)
        index.emplace(spec_.event_ids[i], static_cast<int32_t>(i));
    const auto token_of = [&index](const std::string& id) {
        const auto it = index.find(id);
        return it == index.end() ? -1 : it->second;
    };
    for (const auto& label : spec_.labels) {
        if (!label.rule)
            throw std::invalid_argument("rollout oracle: masked rule for '" + label.id + "'");
        rules_.push_back(compile_rule(*label.rule, token_of));
    }

    // Enumerate the generator's latent structure: one hypothesis per
    // (theme, optional-slot mask, exclusive-slot choice), plus "no theme".
    double rest = 1.0;
    auto add_hypothesis = [&](double prior, const std::vector<uint8_t>& active) {
        Hypothesis h;
        h.prior = prior;
        h.active = active;
        h.initial_cdf.resize(n);
        double cum = 0.0;
        for (size_t j = 0; j < n; ++j) {
            cum += active[j] ? spec_.initial[j] * spec_.theme_boost : spec_.initial[j];
            h.initial_cdf[j] = cum;
        }
        h.cdf.assign(n, std::vector<double>(n));
        for (size_t i = 0; i < n; ++i) {
            cum = 0.0;
            const auto& row = spec_.transition[i];
            for (size_t j = 0; j < n; ++j) {
                cum += active[j] ? row[j] * spec_.theme_boost : row[j];
                h.cdf[i][j] = cum;
            }
        }
        hypotheses_.push_back(std::move(h));
    };

    for (const auto& theme : spec_.themes) {
        rest -= theme.prob;
        // expand slots into weighted activation combinations
        std::vector<std::pair<double, std::vector<uint8_t>>> combos;
        combos.emplace_back(theme.prob, std::vector<uint8_t>(n, 0));
        for (const auto& slot : theme.slots) {
            std::vector<std::pair<double, std::vector<uint8_t>>> next;
            for (const auto& [w, active] : combos) {
                if (slot.events.size() > 1) {
                    const double each = w / static_cast<double>(slot.events.size());
                    for (int32_t e : slot.events) {
                        auto a = active;
                        a[static_cast<size_t>(e)] = 1;
                        next.emplace_back(each, std::move(a));
                    }
                } else if (slot.include_prob >= 1.0) {
                    auto a = active;
                    a[static_cast<size_t>(slot.events[0])] = 1;
                    next.emplace_back(w, std::move(a));
                } else {
                    auto a = active;
                    a[static_cast<size_t>(slot.events[0])] = 1;
                    next.emplace_back(w * slot.include_prob, std::move(a));
                    next.emplace_back(w * (1.0 - slot.include_prob), active);
                }
            }
            combos = std::move(next);
            if (combos.size() > 512)
                throw std::invalid_argument("rollout oracle: theme hypothesis space too large");
        }
        for (auto& [w, active] : combos) add_hypothesis(w, active);
    }
    add_hypothesis(std::max(0.0, rest), std::vector<uint8_t>(n, 0));
}

std::vector<double> RolloutOracle::hypothesis_posterior(std::span<const int32_t> prefix) const {
    const size_t n = spec_.vocab_size();
    std::vector<double> logw(hypotheses_.size());
    for (size_t h = 0; h < hypotheses_.size(); ++h) {
        const auto& hyp = hypotheses_[h];
        double lw = hyp.prior > 0.0 ? std::log(hyp.prior) : -1e30;
        for (size_t i = 0; i < prefix.size(); ++i) {
            const auto tok = static_cast<size_t>(prefix[i]);
            double p;
            if (i == 0) {
                p = hyp.initial_cdf[tok] - (tok ? hyp.initial_cdf[tok - 1] : 0.0);
                p /= hyp.initial_cdf[n - 1];
            } else {
                const auto prev = static_cast<size_t>(prefix[i - 1]);
                p = hyp.cdf[prev][tok] - (tok ? hyp.cdf[prev][tok - 1] : 0.0);
                p /= hyp.cdf[prev][n - 1];
            }
            lw += std::log(std::max(p, 1e-300));
        }
        logw[h] = lw;
    }
    const double m = *std::max_element(logw.begin(), logw.end());
    double sum = 0.0;
    for (auto& w : logw) sum += (w = std::exp(w - m));
    for (auto& w : logw) w /= sum;
    return logw;
}

std::vector<double> RolloutOracle::next_event_dist(std::span<const int32_t> prefix) const {
    const size_t n = spec_.vocab_size();
    const std::vector<double> post = hypothesis_posterior(prefix);
    std::vector<double> dist(n, 0.0);
    for (size_t h = 0; h < hypotheses_.size(); ++h) {
        if (post[h] <= 0.0) continue;
        const auto& hyp = hypotheses_[h];
        if (prefix.empty()) {
            const double z = hyp.initial_cdf[n - 1];
            for (size_t j = 0; j < n; ++j)
                dist[j] += post[h] * (hyp.initial_cdf[j] - (j ? hyp.initial_cdf[j - 1] : 0.0)) / z;
        } else {
            const auto prev = static_cast<size_t>(prefix.back());
            const auto& row = hyp.cdf[prev];
            const double z = row[n - 1];
            for (size_t j = 0; j < n; ++j)
                dist[j] += post[h] * (row[j] - (j ? row[j - 1] : 0.0)) / z;
        }
    }
    return dist;
}

std::vector<double> RolloutOracle::label_probs(std::span<const int32_t> prefix) const {
    return label_probs_with_rollouts(prefix, rollouts_);
}

std::vector<double> RolloutOracle::label_probs_with_rollouts(std::span<const int32_t> prefix,
                                                             int rollouts) const {
    const std::vector<double> post = hypothesis_posterior(prefix);
    std::vector<double> post_cdf(post.size());
    double cum = 0.0;
    for (size_t h = 0; h < post.size(); ++h) post_cdf[h] = (cum += post[h]);

    std::vector<uint8_t> base_present(spec_.vocab_size(), 0);
    for (int32_t t : prefix) base_present[static_cast<size_t>(t)] = 1;

    Rng rng(derive_seed(derive_seed(seed_, fnv1a(prefix)), "rollout"));
    std::vector<int64_t> hits(rules_.size(), 0);
    std::vector<uint8_t> present;
    for (int r = 0; r < rollouts; ++r) {
        const size_t h = rng.cdf_index(post_cdf);
        const auto& hyp = hypotheses_[h];

        // completion length: length model conditioned on >= current prefix
        int target = 0;
        for (int tries = 0; tries < 64; ++tries) {
            target = std::clamp(
                static_cast<int>(std::lround(rng.normal(spec_.length.mean, spec_.length.stddev))),
                spec_.length.min, spec_.length.max);
            if (target >= static_cast<int>(prefix.size())) break;
            target = static_cast<int>(prefix.size());
        }

        present = base_present;
        int32_t prev = prefix.empty() ? -1 : prefix.back();
        for (int i = static_cast<int>(prefix.size()); i < target; ++i) {
            const auto& cdf = prev < 0 ? hyp.initial_cdf : hyp.cdf[static_cast<size_t>(prev)];
            prev = static_cast<int32_t>(rng.cdf_index(cdf));
            present[static_cast<size_t>(prev)] = 1;
        }

        for (size_t j = 0; j < rules_.size(); ++j)
            if (rules_[j].eval(present)) ++hits[j];
    }
    std::vector<double> probs(rules_.size());
    for (size_t j = 0; j < probs.size(); ++j)
        probs[j] = static_cast<double>(hits[j]) / static_cast<double>(rollouts);
    return probs;
}

std::unique_ptr<Estimator> build_rollout_oracle(const GeneratorSpec& spec, int rollouts,
                                                uint64_t seed) {
    return std::make_unique<RolloutOracle>(spec, rollouts, seed);
}

// --- context sampling ----------------------------------------------------

std::vector<std::vector<int32_t>> sample_contexts(const Estimator& estimator,
                                                  std::span<const int32_t> prefix, int anchor_len,
                                                  int n_samples, int top_k, double top_p,
                                                  uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("sample_contexts: N must be >= 1");
    if (top_k < 1) throw std::invalid_argument("sample_contexts: top_k must be >= 1");
    if (!(top_p > 0.0 && top_p <= 1.0))
        throw std::invalid_argument("sample_contexts: top_p must be in (0, 1]");
    if (anchor_len < 0) throw std::invalid_argument("sample_contexts: anchor must be >= 0");

    const size_t anchor = std::min<size_t>(static_cast<size_t>(anchor_len), prefix.size());
    std::vector<std::vector<int32_t>> samples;
    samples.reserve(static_cast<size_t>(n_samples));

    std::vector<std::pair<double, int32_t>> ranked;
    for (int s = 0; s < n_samples; ++s) {
        Rng rng(derive_seed(seed, 0x40000ULL + static_cast<uint64_t>(s)));
        std::vector<int32_t> ctx(prefix.begin(), prefix.begin() + static_cast<ptrdiff_t>(anchor));
        ctx.reserve(prefix.size());
        while (ctx.size() < prefix.size()) {
            const std::vector<double> dist = estimator.next_event_dist(ctx);
            ranked.clear();
            for (size_t j = 0; j < dist.size(); ++j)
                ranked.emplace_back(dist[j], static_cast<int32_t>(j));
            const size_t k = std::min<size_t>(static_cast<size_t>(top_k), ranked.size());
            std::partial_sort(ranked.begin(), ranked.begin() + static_cast<ptrdiff_t>(k),
                              ranked.end(), [](const auto& a, const auto& b) {
                                  return a.first != b.first ? a.first > b.first
                                                            : a.second < b.second;
                              });
            ranked.resize(k);
            // nucleus: smallest head with cumulative mass >= top_p (of the
            // top-k renormalized mass)
            double mass = 0.0;
            for (const auto& [p, tok] : ranked) mass += p;
            size_t keep = k;
            double cum = 0.0;
            for (size_t j = 0; j < k; ++j) {
                cum += ranked[j].first;
                if (cum >= top_p * mass) {
                    keep = j + 1;
                    break;
                }
            }
            ranked.resize(keep);
            double u = rng.next_double() * cum;
            size_t pick = keep - 1;
            for (size_t j = 0; j < keep; ++j) {
                u -= ranked[j].first;
                if (u < 0.0) {
                    pick = j;
                    break;
                }
            }
            ctx.push_back(ranked[pick].second);
        }
        samples.push_back(std::move(ctx));
    }
    return samples;
}

// --- persistence -------------------------------------------------------

class EstimatorIo {
public:
    static std::string ngram_to_json(const NgramEstimator& est) {
        ordered_json j;
        j["format"] = "epmine-estimator";
        j["version"] = 1;
        j["kind"] = est.kind();
        j["config"] = {{"order", est.config_.order},
                       {"alpha", est.config_.alpha},
                       {"prefix_cuts", est.config_.prefix_cuts},
                       {"epochs", est.config_.epochs},
                       {"learning_rate", est.config_.learning_rate},
                       {"l2", est.config_.l2},
                       {"seed", est.config_.seed}};
        j["events"] = est.vocab_;
        j["labels"] = est.label_ids_;
        j["base"] = est.base_;
        auto& levels = j["counts"] = ordered_json::array();
        for (size_t len = 0; len < est.counts_.size(); ++len) {
            ordered_json level = ordered_json::array();
            std::vector<uint64_t> keys;
            keys.reserve(est.counts_[len].size());
            for (const auto& [key, _] : est.counts_[len]) keys.push_back(key);
            std::sort(keys.begin(), keys.end());
            for (const uint64_t key : keys) {
                ordered_json entry = ordered_json::array();
                entry.push_back(key);
                ordered_json succ = ordered_json::array();
                std::vector<std::pair<int32_t, int32_t>> pairs(est.counts_[len].at(key).begin(),
                                                               est.counts_[len].at(key).end());
                std::sort(pairs.begin(), pairs.end());
                for (const auto& [tok, cnt] : pairs) {
                    succ.push_back(tok);
                    succ.push_back(cnt);
                }
                entry.push_back(std::move(succ));
                level.push_back(std::move(entry));
            }
            levels.push_back(std::move(level));
        }
        j["weights"] = est.weights_;
        j["bias"] = est.bias_;
        return j.dump();
    }

    static std::unique_ptr<NgramEstimator> ngram_from_json(const ordered_json& j) {
        auto est = std::unique_ptr<NgramEstimator>(new NgramEstimator());
        const auto& cfg = j.at("config");
        est->config_ = {cfg.at("order").get<int>(),        cfg.at("alpha").get<double>(),
                        cfg.at("prefix_cuts").get<int>(),  cfg.at("epochs").get<int>(),
                        cfg.at("learning_rate").get<double>(), cfg.at("l2").get<double>(),
                        cfg.at("seed").get<uint64_t>()};
        est->vocab_ = j.at("events").get<std::vector<std::string>>();
        est->label_ids_ = j.at("labels").get<std::vector<std::string>>();
        est->base_ = j.at("base").get<std::vector<double>>();
        const auto& levels = j.at("counts");
        est->counts_.resize(levels.size());
        est->totals_.resize(levels.size());
        for (size_t len = 0; len < levels.size(); ++len) {
            for (const auto& entry : levels[len]) {
                const auto key = entry.at(0).get<uint64_t>();
                const auto& succ = entry.at(1);
                auto& bucket = est->counts_[len][key];
                int64_t total = 0;
                for (size_t i = 0; i + 1 < succ.size(); i += 2) {
                    const auto tok = succ[i].get<int32_t>();
                    const auto cnt = succ[i + 1].get<int32_t>();
                    bucket[tok] = cnt;
                    total += cnt;
                }
                est->totals_[len][key] = total;
            }
        }
        est->weights_ = j.at("weights").get<std::vector<std::vector<double>>>();
        est->bias_ = j.at("bias").get<std::vector<double>>();
        return est;
    }
};

std::string NgramEstimator::to_json() const { return EstimatorIo::ngram_to_json(*this); }

std::unique_ptr<NgramEstimator> NgramEstimator::from_json(const std::string& text) {
    return EstimatorIo::ngram_from_json(ordered_json::parse(text));
}

void save_estimator(const Estimator& estimator, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    if (estimator.kind() == "ngram") {
        out << static_cast<const NgramEstimator&>(estimator).to_json() << '\n';
    } else if (estimator.kind() == "rollout-oracle") {
        const auto& oracle = static_cast<const RolloutOracle&>(estimator);
        ordered_json j;
        j["format"] = "epmine-estimator";
        j["version"] = 1;
        j["kind"] = oracle.kind();
        j["rollouts"] = oracle.rollouts();
        j["seed"] = oracle.seed();
        j["spec"] = ordered_json::parse(generator_spec_to_json(oracle.spec()));
        out << j.dump() << '\n';
    } else {
        throw std::invalid_argument("save_estimator: unknown kind '" + estimator.kind() + "'");
    }
}

std::unique_ptr<Estimator> load_estimator(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    if (j.value("format", "") != "epmine-estimator")
        throw DataError(path + ": not an estimator artifact");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "ngram") return EstimatorIo::ngram_from_json(j);
    if (kind == "rollout-oracle")
        return std::make_unique<RolloutOracle>(generator_spec_from_json(j.at("spec").dump()),
                                               j.at("rollouts").get<int>(),
                                               j.at("seed").get<uint64_t>());
    throw DataError(path + ": unknown estimator kind '" + kind + "'");
}

}  // namespace epmine
