#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

// Next-item models over repair-system sequences, scored by average per-item
// perplexity exp(-(1/N) sum ln p_target). The frequency-matched model
// assigns every item its unconditional training frequency; the Markov model
// conditions on up to `order` previous items (shorter at sequence starts)
// with add-alpha smoothing over the vocabulary.

namespace fleetmine {

enum class SequenceModelKind { FrequencyMatched, Markov };

struct SequenceModelConfig {
    SequenceModelKind kind = SequenceModelKind::FrequencyMatched;
    int order = 2;      // Markov only
    double alpha = 0.0; // add-alpha smoothing; 0 = unsmoothed
};

class SequenceModel {
public:
    using Sequence = std::vector<std::string>;

    SequenceModelConfig config;
    std::vector<std::string> vocabulary; // sorted

    // counts[o] maps a length-o context to (next-item counts, context total)
    struct ContextCounts {
        std::map<std::string, std::int64_t> next;
        std::int64_t total = 0;
    };
    std::vector<std::map<Sequence, ContextCounts>> counts;

    bool in_vocabulary(const std::string& item) const {
        return std::binary_search(vocabulary.begin(), vocabulary.end(), item);
    }

    // P(item | context); the context is truncated to the model order and to
    // what the model conditions on.
    double probability(const Sequence& context, const std::string& item) const {
        if (!in_vocabulary(item))
            throw std::runtime_error("sequence model: item outside vocabulary: " + item);
        const int max_order = config.kind == SequenceModelKind::Markov ? config.order : 0;
        const auto use = std::min<std::size_t>(context.size(), static_cast<std::size_t>(max_order));
        const Sequence key(context.end() - static_cast<std::ptrdiff_t>(use), context.end());

        const auto& table = counts[use];
        const auto v = static_cast<double>(vocabulary.size());
        const auto it = table.find(key);
        std::int64_t hit = 0, total = 0;
        if (it != table.end()) {
            total = it->second.total;
            const auto nit = it->second.next.find(item);
            if (nit != it->second.next.end()) hit = nit->second;
        }
        const double num = static_cast<double>(hit) + config.alpha;
        const double den = static_cast<double>(total) + config.alpha * v;
        return den > 0.0 ? num / den : 0.0;
    }
};

// Vocabulary defaults to the training items; pass `vocabulary` to score test
// items unseen in training (requires alpha > 0 for nonzero mass).
inline SequenceModel fit_sequence_model(const std::vector<std::vector<std::string>>& train,
                                        SequenceModelConfig config,
                                        std::vector<std::string> vocabulary = {}) {
    if (train.empty()) throw std::invalid_argument("fit_sequence_model: empty training set");
    if (config.kind == SequenceModelKind::Markov && config.order < 1)
        throw std::invalid_argument("fit_sequence_model: Markov order must be >= 1");
    if (config.alpha < 0.0) throw std::invalid_argument("fit_sequence_model: alpha must be >= 0");

    SequenceModel model;
    model.config = config;
    if (vocabulary.empty()) {
        std::set<std::string> vocab;
        for (const auto& seq : train)
            for (const auto& item : seq) vocab.insert(item);
        model.vocabulary.assign(vocab.begin(), vocab.end());
    } else {
        std::sort(vocabulary.begin(), vocabulary.end());
        vocabulary.erase(std::unique(vocabulary.begin(), vocabulary.end()), vocabulary.end());
        model.vocabulary = std::move(vocabulary);
        for (const auto& seq : train)
            for (const auto& item : seq)
                if (!model.in_vocabulary(item))
                    throw std::invalid_argument(
                        "fit_sequence_model: training item outside supplied vocabulary: " + item);
    }
    if (model.vocabulary.empty())
        throw std::invalid_argument("fit_sequence_model: empty vocabulary");

    const int max_order = config.kind == SequenceModelKind::Markov ? config.order : 0;
    model.counts.resize(static_cast<std::size_t>(max_order) + 1);
    for (const auto& seq : train) {
        for (std::size_t t = 0; t < seq.size(); ++t) {
            const auto use = std::min<std::size_t>(t, static_cast<std::size_t>(max_order));
            const SequenceModel::Sequence key(seq.begin() + static_cast<std::ptrdiff_t>(t - use),
                                              seq.begin() + static_cast<std::ptrdiff_t>(t));
            auto& ctx = model.counts[use][key];
            ++ctx.next[seq[t]];
            ++ctx.total;
        }
    }
    return model;
}

// exp of the mean negative log probability over every item of every test
// sequence. A zero-probability target (possible only with alpha = 0) is an
// error naming the item.
inline double perplexity(const SequenceModel& model,
                         const std::vector<std::vector<std::string>>& test) {
    double log_sum = 0.0;
    std::int64_t n = 0;
    for (const auto& seq : test) {
        std::vector<std::string> context;
        for (const auto& item : seq) {
            const double p = model.probability(context, item);
            if (!(p > 0.0))
                throw std::runtime_error("perplexity: zero probability for item '" + item +
                                         "' (use alpha > 0 for unseen transitions)");
            log_sum += std::log(p);
            ++n;
            context.push_back(item);
        }
    }
    if (n == 0) throw std::invalid_argument("perplexity: no test items");
    return std::exp(-log_sum / static_cast<double>(n));
}

} // namespace fleetmine
