#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "ledgerloop/proposer.hpp"

namespace ledgerloop {

namespace {

constexpr double kEventRate[kArchetypeCount] = {1.0, 1.5, 2.1, 2.8, 3.6};
constexpr double kAmountScale[kArchetypeCount] = {0.6, 0.8, 1.0, 1.25, 1.6};
constexpr int kPaymentMinute = 20 * 60;

struct CategoryWeight {
    const char* category;
    double weight;
};

// Base mix of discretionary categories; car/no-car and hobby tags adjust it below.
constexpr CategoryWeight kMix[] = {
    {"groceries", 0.16}, {"dining", 0.12},        {"fast_food", 0.12}, {"coffee", 0.10},      {"delivery", 0.05},
    {"retail", 0.07},    {"online", 0.08},        {"pharmacy", 0.03},  {"home", 0.03},        {"entertainment", 0.04},
    {"hobby", 0.06},     {"personal_care", 0.02}, {"fashion", 0.02},   {"electronics", 0.01}, {"services", 0.01},
    {"travel", 0.005},
};

double income_factor(IncomeLevel level) {
    switch (level) {
        case IncomeLevel::low: return 0.75;
        case IncomeLevel::med: return 1.0;
        case IncomeLevel::high: return 1.4;
    }
    return 1.0;
}

bool has_tag(const std::vector<std::string>& tags, std::string_view t) {
    return std::find(tags.begin(), tags.end(), t) != tags.end();
}

TransactionEvent payment_event(Date date, Money amount) {
    TransactionEvent e;
    e.timestamp = {date, kPaymentMinute};
    e.merchant_name = "Card Payment";
    e.merchant_type = "Credit Card Payment";
    e.card_present = false;
    e.amount = -amount;
    e.kind = EventKind::payment;
    e.category = "payment";
    return e;
}

}  // namespace

double archetype_event_rate(Archetype a) { return kEventRate[static_cast<int>(a)]; }
double archetype_amount_scale(Archetype a) { return kAmountScale[static_cast<int>(a)]; }

MockProposer::MockProposer(const EngineConfig& config, const Catalog& catalog) : config_(config), catalog_(catalog) {}

double MockProposer::expected_events(Archetype archetype, Date date) const {
    double rate = archetype_event_rate(archetype);
    if (holiday_name(date))
        rate *= 1.4;
    else if (date.weekday() == 0 || date.weekday() == 6)
        rate *= 1.25;
    return rate;
}

DailyPlan MockProposer::propose(const PromptSpec& prompt, const AugmentedPersona& persona, const LedgerState& state,
                                Rng& rng, const ConversationWindow&) {
    if (prompt.previous_plan && !prompt.feedback.empty()) return repair(prompt, state);
    return fresh(prompt, persona, state, rng);
}

std::optional<TransactionEvent> MockProposer::payment_for(const AugmentedPersona& persona, const LedgerState& s,
                                                          Date date) const {
    if (!s.due_date || !s.statement_balance_due.is_positive()) return std::nullopt;
    const Date due = *s.due_date;
    const Date close = due.plus_days(-config_.grace_days);
    const auto cycle = static_cast<std::uint64_t>(due.serial());
    Money want = s.statement_balance_due;
    switch (persona.user_financial_profile.payment_habit) {
        case PaymentHabit::automatic_payment:
            if (date != due) return std::nullopt;
            break;
        case PaymentHabit::manual_on_due_date: {
            Rng c = Rng::derive(config_.seed, "manual:" + persona.user_id, cycle);
            Date day = due.plus_days(-c.uniform_int(1, 3));
            if (day <= close) day = due;
            if (date != day) return std::nullopt;
            break;
        }
        case PaymentHabit::irregular: {
            Rng c = Rng::derive(config_.seed, "irregular:" + persona.user_id, cycle);
            const double u = c.uniform();
            const Date day = close.plus_days(c.uniform_int(1, config_.grace_days));
            if (date != day || u >= 0.8) return std::nullopt;
            if (u < 0.3) want = minimum_payment(s.statement_amount, config_.min_payment_fraction);
            break;
        }
    }
    const Money amount = min(want, min(s.cash, s.credit_balance));
    if (!amount.is_positive()) return std::nullopt;
    return payment_event(date, amount);
}

DailyPlan MockProposer::fresh(const PromptSpec& prompt, const AugmentedPersona& persona, const LedgerState& s,
                              Rng& rng) const {
    const Date date = prompt.date;
    const auto& profile = persona.user_financial_profile;
    const Archetype archetype = profile.archetype().value_or(Archetype::balancer);
    const auto tags = catalog_.tags_for(persona.user_persona);
    const bool car = s.owns_car;

    // Category weights for this persona.
    std::vector<std::pair<std::string, double>> mix;
    for (const auto& cw : kMix) mix.emplace_back(cw.category, cw.weight);
    mix.emplace_back("transport", car ? 0.01 : 0.06);
    if (car) {
        mix.emplace_back("fuel", 0.07);
        mix.emplace_back("auto", 0.01);
    }
    if (has_tag(tags, "pets")) mix.emplace_back("pets", 0.02);
    if (has_tag(tags, "kids")) mix.emplace_back("kids", 0.02);
    double total_weight = 0.0;
    for (const auto& [_, w] : mix) total_weight += w;

    std::vector<const Merchant*> hobby = catalog_.tagged(tags);
    if (hobby.empty()) hobby = catalog_.in_category("hobby");

    const double scale = archetype_amount_scale(archetype) * config_.mock.spend_scale * income_factor(profile.income_level);
    const int n = std::min(rng.poisson(expected_events(archetype, date)), config_.max_events_per_day - 2);

    DailyPlan plan;
    std::vector<int> minutes;
    for (int i = 0; i < n; ++i) minutes.push_back(static_cast<int>(rng.uniform_int(7 * 60, 22 * 60 + 30)));
    std::sort(minutes.begin(), minutes.end());

    std::set<std::string> cadence_used;
    for (int i = 0; i < n; ++i) {
        double pick = rng.uniform() * total_weight;
        std::string category = mix.back().first;
        for (const auto& [c, w] : mix) {
            if (pick < w) {
                category = c;
                break;
            }
            pick -= w;
        }
        // Respect purchase cadence the way a careful shopper would.
        if (category == "groceries" || category == "fuel") {
            const int gap = category == "groceries" ? config_.cadence.groceries_min_gap_days : config_.cadence.fuel_min_gap_days;
            auto it = s.last_purchase_dates.find(category);
            if (cadence_used.count(category) != 0 || (it != s.last_purchase_dates.end() && date - it->second < gap)) {
                category = "fast_food";
            }
            cadence_used.insert(category);
        }
        auto pool = category == "hobby" ? hobby : catalog_.in_category(category);
        if (pool.empty()) pool = catalog_.in_category("retail");
        const Merchant* m = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];

        const double lo = static_cast<double>(m->low.cents());
        const double hi = static_cast<double>(std::max(m->high.cents(), m->low.cents() + 1));
        const double mu = 0.5 * (std::log(lo) + std::log(hi));
        const double sigma = std::log(hi / lo) / 4.0;
        const auto cents = std::max<std::int64_t>(50, round_half_up(rng.lognormal(mu, sigma) * scale));

        TransactionEvent e;
        e.timestamp = {date, minutes[static_cast<std::size_t>(i)]};
        e.merchant_name = m->name;
        e.merchant_type = m->type;
        e.card_present = m->card_present;
        e.amount = Money::from_cents(cents);
        e.kind = EventKind::purchase;
        e.category = m->category;
        plan.events.push_back(std::move(e));
    }

    // Keep discretionary spending within the available credit.
    Money room = s.available_credit();
    std::vector<TransactionEvent> kept;
    for (auto& e : plan.events) {
        if (e.amount > room) continue;
        room -= e.amount;
        kept.push_back(std::move(e));
    }
    plan.events = std::move(kept);

    for (const auto& f : prompt.fragments)
        if (f.kind == PromptFragment::Kind::forced_charge && f.event) plan.events.push_back(*f.event);

    if (rng.bernoulli(config_.mock.signup_prob)) {
        std::vector<const CatalogSubscription*> options;
        for (const auto& sub : catalog_.subscriptions()) {
            bool active = std::any_of(s.subscriptions.begin(), s.subscriptions.end(),
                                      [&](const ScheduleEntry& x) { return x.charge.merchant_name == sub.merchant_name; });
            if (!active) options.push_back(&sub);
        }
        if (!options.empty()) {
            const auto* sub = options[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(options.size()) - 1))];
            TransactionEvent e;
            e.timestamp = {date, 9 * 60};
            e.merchant_name = sub->merchant_name;
            e.merchant_type = sub->product_description;
            e.amount = sub->amount;
            e.kind = EventKind::subscription_charge;
            e.category = "subscription";
            plan.events.push_back(std::move(e));
        }
    }
    if (rng.bernoulli(config_.mock.cancel_prob) && !s.subscriptions.empty()) {
        const auto& entry =
            s.subscriptions[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(s.subscriptions.size()) - 1))];
        if (entry.next_date != date) {
            TransactionEvent e;
            e.timestamp = {date, 9 * 60 + 1};
            e.merchant_name = entry.charge.merchant_name;
            e.merchant_type = entry.charge.product_description;
            e.kind = EventKind::cancel_subscription;
            e.category = "subscription";
            plan.events.push_back(std::move(e));
        }
    }

    if (auto pay = payment_for(persona, s, date)) plan.events.push_back(*pay);

    // Occasional mistakes of the kinds an LLM makes.
    if (rng.bernoulli(config_.mock.error_rate)) {
        switch (rng.uniform_int(0, 2)) {
            case 0:
                if (s.credit_balance.is_positive()) {
                    std::erase_if(plan.events, [](const TransactionEvent& e) { return e.kind == EventKind::payment; });
                    plan.events.push_back(payment_event(date, s.credit_balance + Money::from_cents(rng.uniform_int(100, 5000))));
                    plan.reasoning = "Paying off the card balance in full.";
                }
                break;
            case 1: {
                auto grocers = catalog_.in_category("groceries");
                for (int k = 0; k < 2 && !grocers.empty(); ++k) {
                    const auto* m = grocers[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(grocers.size()) - 1))];
                    TransactionEvent e;
                    e.timestamp = {date, 17 * 60 + k};
                    e.merchant_name = m->name;
                    e.merchant_type = m->type;
                    e.card_present = true;
                    e.amount = Money::from_cents(rng.uniform_int(m->low.cents(), m->high.cents()));
                    e.category = m->category;
                    plan.events.push_back(std::move(e));
                }
                break;
            }
            default:
                if (!plan.events.empty()) {
                    auto& e = plan.events[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(plan.events.size()) - 1))];
                    e.timestamp.date = date.plus_days(-1);
                }
                break;
        }
    }

    if (plan.events.size() > static_cast<std::size_t>(config_.max_events_per_day))
        plan.events.resize(static_cast<std::size_t>(config_.max_events_per_day));
    if (!plan.reasoning)
        plan.reasoning = fmt::format("{} day: {} planned transactions.", to_string(archetype), plan.events.size());
    return plan;
}

DailyPlan MockProposer::repair(const PromptSpec& prompt, const LedgerState& s) const {
    DailyPlan plan = *prompt.previous_plan;
    std::set<std::size_t> drop;
    for (const auto& v : prompt.feedback) {
        if (!v.offending_event_index || *v.offending_event_index >= plan.events.size()) continue;
        const auto i = *v.offending_event_index;
        auto& e = plan.events[i];
        if (v.code == "OVERPAYMENT" || v.code == "PAYMENT_EXCEEDS_CASH") {
            const Money cap = min(v.bound.value_or(Money{}), min(s.cash, s.credit_balance));
            if (cap.is_positive() && e.kind == EventKind::payment)
                e.amount = -min(e.amount.abs(), cap);
            else
                drop.insert(i);
        } else if (v.code == "DATE_MISMATCH") {
            e.timestamp.date = prompt.date;
        } else {
            drop.insert(i);
        }
    }
    std::vector<TransactionEvent> kept;
    for (std::size_t i = 0; i < plan.events.size(); ++i)
        if (drop.count(i) == 0) kept.push_back(plan.events[i]);
    plan.events = std::move(kept);
    plan.reasoning = "Revised plan after feedback.";
    return plan;
}

}  // namespace ledgerloop
