#include "fixtures.hpp"

#include <atomic>
#include <fstream>

#include <unistd.h>

#include <fmt/format.h>

namespace ledgerloop::test {

namespace fs = std::filesystem;

fs::path source_dir() { return LEDGERLOOP_SOURCE_DIR; }
fs::path data_dir() { return LEDGERLOOP_TEST_DATA; }

fs::path scratch_dir(const std::string& name) {
    static std::atomic<int> counter{0};
    auto dir = fs::temp_directory_path() / fmt::format("ledgerloop-test-{}-{}-{}", name, ::getpid(), counter++);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ScheduledCharge subscription(const std::string& name, Money amount, int day_of_month) {
    ScheduledCharge c;
    c.date_to_charge = day_of_month;
    c.amount = amount;
    c.merchant_name = name;
    c.product_description = name + " Subscription";
    return c;
}

ScheduledCharge bill(const std::string& name, Money amount, Money stddev, int day_of_month) {
    ScheduledCharge c;
    c.date_to_charge = day_of_month;
    c.amount = amount;
    c.stddev = stddev;
    c.merchant_name = name;
    c.product_description = name + " Bill";
    return c;
}

AugmentedPersona make_persona(const PersonaSpec& spec) {
    AugmentedPersona p;
    p.user_id = spec.user_id;
    auto& q = p.user_persona;
    q.persona = "A careful planner who likes hiking and cooking at home";
    q.professional_persona = "Works as an accountant in a mid-sized firm";
    q.sports_persona = "Hikes on weekends";
    q.arts_persona = "Enjoys local theater";
    q.travel_persona = "Takes one road trip a year";
    q.culinary_persona = "Cooks most meals at home";
    q.skills_and_expertise_list = {"bookkeeping", "budgeting"};
    q.hobbies_and_interests_list = {"hiking", "cooking"};
    q.career_goals_and_ambitions = "Become a controller";
    q.sex = Sex::female;
    q.age = spec.age;
    q.marital_status = "married_present";
    q.education_level = "bachelors";
    q.bachelors_field = "business";
    q.occupation = "accountant";
    auto& f = p.user_financial_profile;
    f.income_level = spec.income;
    f.credit_limit = spec.credit_limit;
    f.payment_habit = spec.habit;
    f.car_ownership = spec.car;
    f.spending_patterns = archetype_description(spec.archetype);
    f.subscriptions = spec.subscriptions;
    f.recurring_variable_bills = spec.bills;
    return p;
}

AugmentedPersona reference_persona() {
    auto personas = load_personas(data_dir() / "reference_persona.json");
    return personas.at(0);
}

std::vector<AugmentedPersona> sample_personas(std::size_t n) {
    auto personas = load_personas(source_dir() / "data" / "sample_personas.jsonl");
    if (personas.size() > n) personas.resize(n);
    return personas;
}

LedgerState make_state(Money cash, Money balance, Money limit, Date today) {
    LedgerState s;
    s.cash = cash;
    s.credit_balance = balance;
    s.credit_limit = limit;
    s.current_date = today;
    return s;
}

TransactionEvent purchase(Date date, Money amount, const std::string& merchant, const std::string& type, int minute,
                          const std::string& category) {
    TransactionEvent e;
    e.timestamp = {date, minute};
    e.merchant_name = merchant;
    e.merchant_type = type;
    e.card_present = true;
    e.amount = amount;
    e.kind = EventKind::purchase;
    e.category = category;
    return e;
}

TransactionEvent payment(Date date, Money amount, int minute) {
    TransactionEvent e;
    e.timestamp = {date, minute};
    e.merchant_name = "Card Payment";
    e.merchant_type = "Credit Card Payment";
    e.amount = -amount.abs();
    e.kind = EventKind::payment;
    e.category = "payment";
    return e;
}

std::string ScriptedClient::complete(const std::vector<ChatMessage>& messages) {
    requests.push_back(messages);
    if (replies_.empty()) throw BackendError("script exhausted");
    auto reply = std::move(replies_.front());
    replies_.pop_front();
    return reply;
}

}  // namespace ledgerloop::test
