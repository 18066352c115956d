#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledgerloop/ledger.hpp"
#include "ledgerloop/tasks.hpp"

namespace ledgerloop {

/// Categorical index maps. Index size() of each list is its unknown bucket.
struct Vocab {
    std::size_t threshold = 0;
    std::vector<std::string> names;
    std::vector<std::string> types;
    std::map<std::string, std::size_t, std::less<>> name_index;
    std::map<std::string, std::size_t, std::less<>> type_index;

    std::size_t name_dims() const { return names.size() + 1; }
    std::size_t type_dims() const { return types.size() + 1; }
    std::size_t dims() const { return name_dims() + type_dims() + 2; }
    std::size_t index_of_name(std::string_view name) const;
    std::size_t index_of_type(std::string_view type) const;

    friend bool operator==(const Vocab& a, const Vocab& b) {
        return a.threshold == b.threshold && a.names == b.names && a.types == b.types;
    }
};

/// Indexes categories seen more than `threshold` times, by descending count
/// then lexicographically.
Vocab build_vocab(const std::vector<TransactionEvent>& train_events, std::size_t threshold);
/// Every event of every example (overlapping windows count once per window).
std::vector<TransactionEvent> training_events(const std::vector<TaskExample>& examples, const std::string& split = "train");

nlohmann::ordered_json to_json(const Vocab& vocab);
Vocab vocab_from_json(const nlohmann::json& j);

/// sign(x) * ln(1 + |x|)
double sgn_log(double x);
/// sgn_log of the decimal dollar value.
double sgn_log_amount(Money amount);

struct FeatureVector {
    std::size_t name_index = 0;
    std::size_t type_index = 0;
    bool card_present = false;
    double sgn_log_amount = 0.0;

    /// [name one-hot | type one-hot | card bit | sgn_log_amount]
    std::vector<double> dense(const Vocab& vocab) const;
};

FeatureVector encode_event(const TransactionEvent& event, const Vocab& vocab);

struct EncodeSummary {
    std::size_t rows = 0;
    std::size_t dims = 0;
};

/// Dense CSV rows (example_id, position, split, label, features...) plus a JSON header.
EncodeSummary write_features(const std::vector<TaskExample>& examples, const Vocab& vocab, std::ostream& csv,
                             nlohmann::ordered_json& header);

}  // namespace ledgerloop
