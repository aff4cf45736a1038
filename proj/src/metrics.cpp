#include "belle/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "belle/serialization.hpp"

namespace belle::eval {
namespace {

std::vector<std::string> split_tokens(const std::string& s) {
    std::vector<std::string> tokens;
    std::istringstream in(s);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

double f1_against(const std::vector<std::string>& pred_tokens, const std::string& gold) {
    const auto gold_tokens = split_tokens(normalize_answer(gold));
    if (pred_tokens.empty() && gold_tokens.empty()) return 1.0;
    if (pred_tokens.empty() || gold_tokens.empty()) return 0.0;

    std::map<std::string, int> gold_counts;
    for (const auto& t : gold_tokens) ++gold_counts[t];
    int overlap = 0;
    for (const auto& t : pred_tokens) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            ++overlap;
            --it->second;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / pred_tokens.size();
    const double recall = static_cast<double>(overlap) / gold_tokens.size();
    return 2.0 * precision * recall / (precision + recall);
}

void accumulate(MetricAggregate& agg, const MetricRecord& record) {
    ++agg.count;
    agg.em += record.em;
    agg.f1 += record.f1;
    if (record.acc) agg.acc = agg.acc.value_or(0.0) + *record.acc;
    agg.usage += record.usage;
}

void finalize(MetricAggregate& agg) {
    if (agg.count == 0) return;
    agg.em /= agg.count;
    agg.f1 /= agg.count;
    if (agg.acc) *agg.acc /= agg.count;
}

nlohmann::ordered_json aggregate_to_json(const MetricAggregate& agg) {
    nlohmann::ordered_json j;
    j["count"] = agg.count;
    j["em"] = agg.em;
    j["f1"] = agg.f1;
    if (agg.acc) j["acc"] = *agg.acc;
    j["usage"] = to_json(agg.usage);
    return j;
}

}  // namespace

std::string normalize_answer(std::string_view s) {
    std::string cleaned;
    cleaned.reserve(s.size());
    for (unsigned char c : s) {
        if (std::ispunct(c)) continue;
        cleaned.push_back(static_cast<char>(std::tolower(c)));
    }
    std::istringstream in(cleaned);
    std::string token;
    std::string out;
    while (in >> token) {
        if (token == "a" || token == "an" || token == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

int exact_match(const std::string& pred, const std::vector<std::string>& golds) {
    if (golds.empty()) throw EvalError(EvalErrorKind::NoGold, "no gold answers");
    const auto normalized = normalize_answer(pred);
    return std::any_of(golds.begin(), golds.end(),
                       [&](const std::string& g) { return normalize_answer(g) == normalized; })
               ? 1
               : 0;
}

double token_f1(const std::string& pred, const std::vector<std::string>& golds) {
    if (golds.empty()) throw EvalError(EvalErrorKind::NoGold, "no gold answers");
    const auto pred_tokens = split_tokens(normalize_answer(pred));
    double best = 0.0;
    for (const auto& gold : golds) best = std::max(best, f1_against(pred_tokens, gold));
    return best;
}

int acc_llm(const std::string& pred, const std::vector<std::string>& golds, const Question& q,
            llm::Gateway& gateway) {
    if (golds.empty()) throw EvalError(EvalErrorKind::NoGold, "no gold answers");

    std::ostringstream user;
    user << "Question: " << q.text << "\nPredicted answer: " << pred << "\nGold answers:";
    for (const auto& g : golds) user << " '" << g << "'";
    user << "\nIs the predicted answer semantically consistent with any gold answer? Reply YES "
            "or NO.";

    llm::CompletionRequest request;
    request.messages = {{llm::MessageRole::System,
                         "You judge whether a predicted answer means the same thing as a gold "
                         "answer. Reply with exactly YES or NO."},
                        {llm::MessageRole::User, user.str()}};
    request.temperature = 0.0;
    request.max_output_tokens = 8;
    request.tag = "eval.acc";
    const auto response = gateway.complete(request);

    std::string verdict;
    for (unsigned char c : response.content)
        verdict.push_back(static_cast<char>(std::toupper(c)));
    const auto yes = verdict.find("YES");
    const auto no = verdict.find("NO");
    if (yes != std::string::npos && (no == std::string::npos || yes < no)) return 1;
    if (no != std::string::npos) return 0;
    return exact_match(pred, golds);
}

MetricReport evaluate_run(const std::vector<PredictionRecord>& predictions,
                          const std::vector<Question>& dataset, llm::Gateway* acc_gateway) {
    std::map<std::string, const Question*> by_id;
    for (const auto& q : dataset) by_id[q.id] = &q;

    MetricReport report;
    for (const auto& prediction : predictions) {
        const auto it = by_id.find(prediction.id);
        if (it == by_id.end())
            throw EvalError(EvalErrorKind::IdMismatch,
                            "prediction id '" + prediction.id + "' not in dataset");
        const Question& q = *it->second;

        MetricRecord record;
        record.id = prediction.id;
        record.type = q.declared_type ? q.declared_type->label : std::string{};
        record.hops = q.hops;
        record.usage = prediction.usage;
        record.failed = prediction.failed;
        record.error = prediction.error;
        if (!prediction.failed && !q.gold_answers.empty()) {
            record.em = exact_match(prediction.answer, q.gold_answers);
            record.f1 = token_f1(prediction.answer, q.gold_answers);
            if (acc_gateway)
                record.acc = acc_llm(prediction.answer, q.gold_answers, q, *acc_gateway);
        }
        report.records.push_back(std::move(record));
    }

    for (const auto& record : report.records) {
        if (record.failed) {
            ++report.failed_count;
            continue;
        }
        accumulate(report.overall, record);
        accumulate(report.per_type[record.type.empty() ? "untyped" : record.type], record);
        if (record.hops) accumulate(report.per_hops[*record.hops], record);
    }
    finalize(report.overall);
    for (auto& [_, agg] : report.per_type) finalize(agg);
    for (auto& [_, agg] : report.per_hops) finalize(agg);
    return report;
}

nlohmann::ordered_json MetricReport::to_json() const {
    nlohmann::ordered_json j;
    auto& recs = j["records"] = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        nlohmann::ordered_json rec;
        rec["id"] = r.id;
        rec["failed"] = r.failed;
        if (r.failed) {
            rec["error"] = r.error;
        } else {
            rec["em"] = r.em;
            rec["f1"] = r.f1;
            if (r.acc) rec["acc"] = *r.acc;
        }
        if (!r.type.empty()) rec["type"] = r.type;
        if (r.hops) rec["hops"] = *r.hops;
        rec["usage"] = belle::to_json(r.usage);
        recs.push_back(std::move(rec));
    }
    j["overall"] = aggregate_to_json(overall);
    auto& types = j["per_type"] = nlohmann::ordered_json::object();
    for (const auto& [label, agg] : per_type) types[label] = aggregate_to_json(agg);
    auto& hops = j["per_hops"] = nlohmann::ordered_json::object();
    for (const auto& [h, agg] : per_hops) hops[std::to_string(h)] = aggregate_to_json(agg);
    j["failed_count"] = failed_count;
    return j;
}

std::string MetricReport::to_table() const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    const auto row = [&](const std::string& name, const MetricAggregate& agg) {
        out << "  " << std::left << std::setw(16) << name << " n=" << std::setw(5) << agg.count
            << " em=" << agg.em << " f1=" << agg.f1;
        if (agg.acc) out << " acc=" << *agg.acc;
        out << "\n";
    };
    out << "overall\n";
    row("all", overall);
    if (!per_type.empty()) {
        out << "per type\n";
        for (const auto& [label, agg] : per_type) row(label, agg);
    }
    if (!per_hops.empty()) {
        out << "per hops\n";
        for (const auto& [h, agg] : per_hops) row(std::to_string(h) + "-hop", agg);
    }
    if (failed_count) out << "failed records: " << failed_count << "\n";
    return out.str();
}

TokenReport token_report(const llm::TokenLedger& ledger, const MetricReport& report) {
    TokenReport out;
    for (const auto& [tag, usage] : ledger.entries()) {
        const auto dot = tag.find('.');
        out.per_phase[dot == std::string::npos ? tag : tag.substr(0, dot)] += usage;
        out.total += usage;
    }
    out.question_count = report.records.size();
    if (out.question_count > 0)
        out.avg_prompt_tokens_per_question =
            static_cast<double>(out.total.prompt_tokens) /
            static_cast<double>(out.question_count);
    return out;
}

nlohmann::ordered_json TokenReport::to_json() const {
    nlohmann::ordered_json j;
    auto& phases = j["per_phase"] = nlohmann::ordered_json::object();
    for (const auto& [phase, usage] : per_phase) phases[phase] = belle::to_json(usage);
    j["total"] = belle::to_json(total);
    j["question_count"] = question_count;
    j["avg_prompt_tokens_per_question"] = avg_prompt_tokens_per_question;
    return j;
}

std::string TokenReport::to_table() const {
    std::ostringstream out;
    out << "token consumption\n";
    for (const auto& [phase, usage] : per_phase)
        out << "  " << std::left << std::setw(12) << phase << " prompt=" << usage.prompt_tokens
            << " completion=" << usage.completion_tokens << "\n";
    out << "  total prompt=" << total.prompt_tokens << " completion=" << total.completion_tokens
        << "\n";
    out << "  avg prompt tokens/question=" << avg_prompt_tokens_per_question << "\n";
    return out.str();
}

std::vector<Question> load_dataset_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset " + path.string());
    std::vector<Question> questions;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            questions.push_back(question_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
    return questions;
}

}  // namespace belle::eval
