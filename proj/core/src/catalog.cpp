#include "ledgerloop/catalog.hpp"

#include <algorithm>
#include <cctype>

#include "ledgerloop/persona.hpp"

namespace ledgerloop {

namespace data {
extern const std::string_view catalog_json;
}

namespace {

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

Money dollars(const nlohmann::json& j, const char* key) {
    return Money::from_dollars_rounded(j.value(key, 0.0));
}

std::vector<std::string> tags(const nlohmann::json& j) {
    return j.value("tags", std::vector<std::string>{});
}

bool has_any(const std::vector<std::string>& have, const std::vector<std::string>& want) {
    return std::any_of(have.begin(), have.end(),
                       [&](const auto& t) { return std::find(want.begin(), want.end(), t) != want.end(); });
}

/// True when `keyword` occurs in `text` at the start of a word.
/// Position of the first match of `keyword` at a word start, or npos.
std::size_t word_prefix_match(std::string_view text, std::string_view keyword) {
    for (std::size_t pos = text.find(keyword); pos != std::string_view::npos; pos = text.find(keyword, pos + 1)) {
        if (pos == 0 || !std::isalnum(static_cast<unsigned char>(text[pos - 1]))) return pos;
    }
    return std::string_view::npos;
}

}  // namespace

const Catalog& Catalog::builtin() {
    static const Catalog catalog = from_json(nlohmann::json::parse(data::catalog_json));
    return catalog;
}

Catalog Catalog::from_json(const nlohmann::json& j) {
    Catalog c;
    c.version_ = j.value("version", "");
    for (const auto& m : j.at("merchants")) {
        c.merchants_.push_back({m.at("name"), m.at("type"), m.at("category"), dollars(m, "low"), dollars(m, "high"),
                                m.value("card_present", true), tags(m)});
    }
    for (const auto& s : j.at("subscriptions")) {
        c.subscriptions_.push_back({s.at("merchant_name"), s.at("product_description"), dollars(s, "amount"),
                                    s.value("charge_frequency_month", 1), tags(s)});
    }
    for (const auto& b : j.at("recurring_bills")) {
        c.bills_.push_back({b.at("merchant_name"), b.at("product_description"), dollars(b, "amount"), dollars(b, "std"),
                            b.value("charge_frequency_month", 1), tags(b)});
    }
    for (const auto& r : j.at("random_events")) {
        c.random_events_.push_back({r.at("name"), r.at("merchant_name"), r.at("merchant_type"), dollars(r, "low"),
                                    dollars(r, "high"), r.value("card_present", true)});
    }
    for (const auto& [key, value] : j.at("hobby_keywords").items())
        c.hobby_keywords_.emplace_back(key, value.get<std::vector<std::string>>());
    for (std::size_t i = 0; i < c.merchants_.size(); ++i) {
        c.by_name_.emplace(c.merchants_[i].name, i);
        c.type_category_.emplace(lower(c.merchants_[i].type), c.merchants_[i].category);
    }
    return c;
}

const Merchant* Catalog::find_merchant(std::string_view name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : &merchants_[it->second];
}

std::vector<const Merchant*> Catalog::in_category(std::string_view category) const {
    std::vector<const Merchant*> out;
    for (const auto& m : merchants_)
        if (m.category == category) out.push_back(&m);
    return out;
}

std::vector<const Merchant*> Catalog::tagged(const std::vector<std::string>& want) const {
    std::vector<const Merchant*> out;
    for (const auto& m : merchants_)
        if (m.category == "hobby" && has_any(m.tags, want)) out.push_back(&m);
    return out;
}

std::vector<std::string> Catalog::tags_for_text(std::string_view text) const {
    auto t = lower(text);
    std::vector<std::pair<std::size_t, const std::vector<std::string>*>> hits;
    for (const auto& [keyword, kw_tags] : hobby_keywords_)
        if (auto pos = word_prefix_match(t, keyword); pos != std::string_view::npos) hits.emplace_back(pos, &kw_tags);
    std::stable_sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> out;
    for (const auto& [_, kw_tags] : hits)
        for (const auto& tag : *kw_tags)
            if (std::find(out.begin(), out.end(), tag) == out.end()) out.push_back(tag);
    return out;
}

std::vector<std::string> Catalog::tags_for(const Persona& persona) const {
    std::vector<std::string> out;
    for (const auto& hobby : persona.hobbies_and_interests_list) {
        for (auto& tag : tags_for_text(hobby))
            if (std::find(out.begin(), out.end(), tag) == out.end()) out.push_back(std::move(tag));
    }
    return out;
}

std::string Catalog::category_of(std::string_view merchant_name, std::string_view merchant_type) const {
    if (const auto* m = find_merchant(merchant_name)) return m->category;
    auto type = lower(merchant_type);
    if (auto it = type_category_.find(type); it != type_category_.end()) return it->second;
    if (type.find("grocer") != std::string::npos || type.find("supermarket") != std::string::npos) return "groceries";
    if (type.find("gas") != std::string::npos || type.find("fuel") != std::string::npos) return "fuel";
    return "other";
}

}  // namespace ledgerloop
