#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledgerloop/money.hpp"

namespace ledgerloop {

struct Persona;

struct Merchant {
    std::string name;
    std::string type;
    std::string category;  // groceries, fuel, dining, hobby, ...
    Money low;
    Money high;
    bool card_present = true;
    std::vector<std::string> tags;
};

struct CatalogSubscription {
    std::string merchant_name;
    std::string product_description;
    Money amount;
    int charge_frequency_month = 1;
    std::vector<std::string> tags;  // hobby tags or "generic"
};

struct CatalogBill {
    std::string merchant_name;
    std::string product_description;
    Money amount;
    Money stddev;
    int charge_frequency_month = 1;
    std::vector<std::string> tags;  // core, extra, car, homeowner, renter
};

struct RandomEventTemplate {
    std::string name;
    std::string merchant_name;
    std::string merchant_type;
    Money low;
    Money high;
    bool card_present = true;
};

/// Bundled merchant, subscription, bill and random-event catalog.
class Catalog {
public:
    static const Catalog& builtin();
    static Catalog from_json(const nlohmann::json& j);

    const std::string& version() const { return version_; }
    const std::vector<Merchant>& merchants() const { return merchants_; }
    const std::vector<CatalogSubscription>& subscriptions() const { return subscriptions_; }
    const std::vector<CatalogBill>& bills() const { return bills_; }
    const std::vector<RandomEventTemplate>& random_events() const { return random_events_; }

    const Merchant* find_merchant(std::string_view name) const;
    /// Merchants of one category, in catalog order.
    std::vector<const Merchant*> in_category(std::string_view category) const;
    /// Hobby merchants carrying any of `tags`.
    std::vector<const Merchant*> tagged(const std::vector<std::string>& tags) const;

    /// Hobby tags for a persona, in order of first appearance in its hobby list.
    std::vector<std::string> tags_for(const Persona& persona) const;
    /// Tags for free text (word-prefix keyword match).
    std::vector<std::string> tags_for_text(std::string_view text) const;

    /// Spending category used for cadence tracking: catalog lookup by name,
    /// then by merchant type; "other" when unknown.
    std::string category_of(std::string_view merchant_name, std::string_view merchant_type) const;

private:
    std::string version_;
    std::vector<Merchant> merchants_;
    std::vector<CatalogSubscription> subscriptions_;
    std::vector<CatalogBill> bills_;
    std::vector<RandomEventTemplate> random_events_;
    std::vector<std::pair<std::string, std::vector<std::string>>> hobby_keywords_;
    std::map<std::string, std::size_t, std::less<>> by_name_;
    std::map<std::string, std::string, std::less<>> type_category_;
};

}  // namespace ledgerloop
