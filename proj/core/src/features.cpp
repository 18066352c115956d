#include "ledgerloop/features.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace ledgerloop {

namespace {

std::vector<std::string> frequent(const std::map<std::string, std::size_t>& counts, std::size_t threshold) {
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [key, n] : counts)
        if (n > threshold) kept.emplace_back(key, n);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::vector<std::string> out;
    for (auto& [key, _] : kept) out.push_back(std::move(key));
    return out;
}

void reindex(Vocab& v) {
    v.name_index.clear();
    v.type_index.clear();
    for (std::size_t i = 0; i < v.names.size(); ++i) v.name_index.emplace(v.names[i], i);
    for (std::size_t i = 0; i < v.types.size(); ++i) v.type_index.emplace(v.types[i], i);
}

}  // namespace

std::size_t Vocab::index_of_name(std::string_view name) const {
    auto it = name_index.find(name);
    return it == name_index.end() ? names.size() : it->second;
}

std::size_t Vocab::index_of_type(std::string_view type) const {
    auto it = type_index.find(type);
    return it == type_index.end() ? types.size() : it->second;
}

Vocab build_vocab(const std::vector<TransactionEvent>& train_events, std::size_t threshold) {
    std::map<std::string, std::size_t> names, types;
    for (const auto& e : train_events) {
        ++names[e.merchant_name];
        ++types[e.merchant_type];
    }
    Vocab v;
    v.threshold = threshold;
    v.names = frequent(names, threshold);
    v.types = frequent(types, threshold);
    reindex(v);
    return v;
}

std::vector<TransactionEvent> training_events(const std::vector<TaskExample>& examples, const std::string& split) {
    std::vector<TransactionEvent> out;
    for (const auto& x : examples)
        if (x.split == split) out.insert(out.end(), x.events.begin(), x.events.end());
    return out;
}

nlohmann::ordered_json to_json(const Vocab& v) {
    nlohmann::ordered_json j;
    j["threshold"] = v.threshold;
    j["merchant_names"] = v.names;
    j["merchant_types"] = v.types;
    j["unknown_name_index"] = v.names.size();
    j["unknown_type_index"] = v.types.size();
    return j;
}

Vocab vocab_from_json(const nlohmann::json& j) {
    Vocab v;
    v.threshold = j.at("threshold").get<std::size_t>();
    v.names = j.at("merchant_names").get<std::vector<std::string>>();
    v.types = j.at("merchant_types").get<std::vector<std::string>>();
    reindex(v);
    return v;
}

double sgn_log(double x) {
    if (x == 0.0) return 0.0;
    const double m = std::log1p(std::abs(x));
    return x < 0.0 ? -m : m;
}

double sgn_log_amount(Money amount) { return sgn_log(static_cast<double>(amount.cents()) / 100.0); }

std::vector<double> FeatureVector::dense(const Vocab& vocab) const {
    std::vector<double> row(vocab.dims(), 0.0);
    row[name_index] = 1.0;
    row[vocab.name_dims() + type_index] = 1.0;
    row[vocab.name_dims() + vocab.type_dims()] = card_present ? 1.0 : 0.0;
    row[vocab.name_dims() + vocab.type_dims() + 1] = sgn_log_amount;
    return row;
}

FeatureVector encode_event(const TransactionEvent& e, const Vocab& vocab) {
    return {vocab.index_of_name(e.merchant_name), vocab.index_of_type(e.merchant_type), e.card_present,
            sgn_log_amount(e.amount)};
}

EncodeSummary write_features(const std::vector<TaskExample>& examples, const Vocab& vocab, std::ostream& csv,
                             nlohmann::ordered_json& header) {
    EncodeSummary s;
    s.dims = vocab.dims();
    csv << "example_id,position,split,label";
    for (std::size_t i = 0; i < vocab.name_dims(); ++i) csv << ",name_" << i;
    for (std::size_t i = 0; i < vocab.type_dims(); ++i) csv << ",type_" << i;
    csv << ",card_present,sgn_log_amount\n";
    for (const auto& x : examples) {
        for (std::size_t p = 0; p < x.events.size(); ++p) {
            const int label = x.task == TaskKind::illiquidity ? (x.label.value_or(false) ? 1 : 0)
                                                              : (p < x.event_labels.size() ? x.event_labels[p] : 0);
            csv << x.example_id << ',' << p << ',' << x.split << ',' << label;
            const auto row = encode_event(x.events[p], vocab).dense(vocab);
            for (std::size_t i = 0; i + 1 < row.size(); ++i) csv << (row[i] != 0.0 ? ",1" : ",0");
            csv << fmt::format(",{:.17g}\n", row.back());
            ++s.rows;
        }
    }
    header["rows"] = s.rows;
    header["dims"] = s.dims;
    header["blocks"] = {{{"name", "merchant_name"}, {"offset", 0}, {"size", vocab.name_dims()}},
                        {{"name", "merchant_type"}, {"offset", vocab.name_dims()}, {"size", vocab.type_dims()}},
                        {{"name", "card_present"}, {"offset", vocab.name_dims() + vocab.type_dims()}, {"size", 1}},
                        {{"name", "sgn_log_amount"}, {"offset", vocab.name_dims() + vocab.type_dims() + 1}, {"size", 1}}};
    header["label"] = examples.empty() || examples.front().task == TaskKind::illiquidity ? "example" : "event";
    header["vocab_threshold"] = vocab.threshold;
    header["reference_dims"] = {{"merchant_name", 418}, {"merchant_type", 266}, {"total", 686}};
    return s;
}

}  // namespace ledgerloop
