// belle: multi-hop question answering through a bi-level multi-agent debate
// over reasoning operators, executed against a BM25 corpus.
//
// Subcommands: ingest, classify, debate, answer, eval.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "belle/pipeline.hpp"
#include "belle/serialization.hpp"

namespace {

using namespace belle;

struct CommonFlags {
    std::string config_path;
    std::string backend_kind;
    std::string script_path;
    int max_rounds = 0;
    std::string debate_level;
    int k_docs = 0;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Run config JSON file");
    cmd->add_option("--backend", flags.backend_kind, "Backend kind override (mock|http)");
    cmd->add_option("--script", flags.script_path, "Mock script path override");
    cmd->add_option("--max-rounds", flags.max_rounds, "Debate round limit override");
    cmd->add_option("--debate-level", flags.debate_level, "Debate level (L0..L3)")
        ->check(CLI::IsMember({"L0", "L1", "L2", "L3"}));
    cmd->add_option("--k-docs", flags.k_docs, "Candidate documents per retrieval");
    cmd->add_option("--out", flags.out_dir, "Output directory for run artifacts");
}

cli::RunConfig build_config(const CommonFlags& flags) {
    cli::RunConfig cfg = flags.config_path.empty() ? cli::RunConfig::defaults()
                                                   : cli::RunConfig::load(flags.config_path);
    if (!flags.backend_kind.empty()) cfg.backend.kind = flags.backend_kind;
    if (!flags.script_path.empty()) cfg.backend.script_path = flags.script_path;
    if (flags.max_rounds > 0) cfg.debate.max_rounds = flags.max_rounds;
    if (!flags.debate_level.empty())
        cfg.debate.level = *debate_level_from_string(flags.debate_level);
    if (flags.k_docs > 0) cfg.budget.k_docs = flags.k_docs;
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    cfg.validate();
    return cfg;
}

Question make_question(const std::string& id, const std::string& text,
                       const std::string& type_label) {
    Question q;
    q.id = id.empty() ? "q" : id;
    q.text = text;
    if (!type_label.empty()) q.declared_type = QuestionType{type_label};
    if (const auto bad = question_violations(q); !bad.empty())
        throw std::runtime_error("invalid question: " + bad.front());
    return q;
}

void write_ledger(const llm::TokenLedger& ledger, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    auto& entries = j["entries"] = nlohmann::ordered_json::array();
    for (const auto& [tag, usage] : ledger.entries())
        entries.push_back({{"tag", tag}, {"usage", to_json(usage)}});
    const auto report = ledger.report();
    auto& per_tag = j["per_tag"] = nlohmann::ordered_json::object();
    for (const auto& [tag, usage] : report.per_tag) per_tag[tag] = to_json(usage);
    j["total"] = to_json(report.total);
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

int cmd_ingest(const std::string& corpus_path, const std::string& index_path) {
    const auto docs = retrieval::load_corpus_jsonl(corpus_path);
    const auto index = retrieval::RetrievalIndex::build(docs);
    index.save(index_path);
    std::cout << "ingested " << index.doc_count() << " documents, " << index.term_count()
              << " terms -> " << index_path << "\n";
    return 0;
}

int cmd_classify(const CommonFlags& flags, const std::string& text, const std::string& id) {
    auto pipeline = cli::Pipeline::from_config(build_config(flags));
    const auto q = make_question(id, text, "");
    TokenUsage usage;
    const auto type = pipeline.classify_question(q, &usage);

    const auto run_dir = pipeline.make_run_dir(q.id);
    std::ofstream out(run_dir / "classification.json");
    out << nlohmann::ordered_json{{"question", to_json(q)},
                                  {"type", type.label},
                                  {"usage", to_json(usage)}}
               .dump(2)
        << "\n";
    write_ledger(pipeline.gateway().ledger(), run_dir / "ledger.json");

    std::cout << type.label << "\n";
    std::cerr << "artifacts: " << run_dir.string() << "\n";
    return 0;
}

int cmd_debate(const CommonFlags& flags, const std::string& text, const std::string& id,
               const std::string& type_label) {
    auto pipeline = cli::Pipeline::from_config(build_config(flags));
    const auto q = make_question(id, text, type_label);
    const auto type = q.declared_type ? *q.declared_type : pipeline.classify_question(q);
    const auto [plan, transcript] = pipeline.debate_question(q, type);

    const auto run_dir = pipeline.make_run_dir(q.id);
    std::ofstream transcript_out(run_dir / "transcript.jsonl");
    for (const auto& u : transcript.utterances) transcript_out << to_json(u).dump() << "\n";
    std::ofstream plan_out(run_dir / "plan.json");
    plan_out << to_json(plan).dump(2) << "\n";
    write_ledger(pipeline.gateway().ledger(), run_dir / "ledger.json");

    std::cout << to_json(plan).dump(2) << "\n";
    std::cerr << "artifacts: " << run_dir.string() << "\n";
    return 0;
}

int cmd_answer(const CommonFlags& flags, const std::string& text, const std::string& id,
               const std::string& type_label) {
    auto pipeline = cli::Pipeline::from_config(build_config(flags));
    const auto q = make_question(id, text, type_label);
    const auto result = pipeline.answer(q);

    const auto run_dir = pipeline.make_run_dir(q.id);
    pipeline.persist(q, result, run_dir);
    write_ledger(pipeline.gateway().ledger(), run_dir / "ledger.json");

    std::cout << result.trace.final_answer << "\n";
    std::cerr << "type=" << result.type.label << " plan_steps=" << result.plan.steps.size()
              << " artifacts=" << run_dir.string() << "\n";
    return 0;
}

int cmd_eval(const CommonFlags& flags, const std::string& dataset_path) {
    auto pipeline = cli::Pipeline::from_config(build_config(flags));
    const auto dataset = eval::load_dataset_jsonl(dataset_path);
    const auto run_dir = pipeline.make_run_dir("eval");
    const auto outcome = cli::run_eval(pipeline, dataset, run_dir / "questions");

    std::ofstream report_out(run_dir / "report.json");
    report_out << outcome.report.to_json().dump(2) << "\n";
    std::ofstream tokens_out(run_dir / "token_report.json");
    tokens_out << outcome.tokens.to_json().dump(2) << "\n";
    write_ledger(pipeline.gateway().ledger(), run_dir / "ledger.json");

    std::cout << outcome.report.to_table();
    std::cout << outcome.tokens.to_table();
    std::cerr << "artifacts: " << run_dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"belle: operator-plan debate engine for multi-hop QA"};
    app.require_subcommand(1);

    CommonFlags flags;

    std::string corpus_path, index_path;
    auto* ingest = app.add_subcommand("ingest", "Build a BM25 index from a JSONL corpus");
    ingest->add_option("corpus", corpus_path, "Corpus JSONL file")->required();
    ingest->add_option("index", index_path, "Output index file")->required();

    std::string question_text, question_id, type_label, dataset_path;
    auto* classify_cmd = app.add_subcommand("classify", "Classify one question's type");
    classify_cmd->add_option("question", question_text, "Question text")->required();
    classify_cmd->add_option("--id", question_id, "Question id");
    add_common(classify_cmd, flags);

    auto* debate_cmd = app.add_subcommand("debate", "Debate an operator plan for one question");
    debate_cmd->add_option("question", question_text, "Question text")->required();
    debate_cmd->add_option("--id", question_id, "Question id");
    debate_cmd->add_option("--type", type_label, "Declared question type (skips classifier)");
    add_common(debate_cmd, flags);

    auto* answer_cmd = app.add_subcommand("answer", "Answer one question end to end");
    answer_cmd->add_option("question", question_text, "Question text")->required();
    answer_cmd->add_option("--id", question_id, "Question id");
    answer_cmd->add_option("--type", type_label, "Declared question type (skips classifier)");
    add_common(answer_cmd, flags);

    auto* eval_cmd = app.add_subcommand("eval", "Run and score a JSONL dataset");
    eval_cmd->add_option("dataset", dataset_path, "Dataset JSONL file")->required();
    add_common(eval_cmd, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(corpus_path, index_path);
        if (classify_cmd->parsed()) return cmd_classify(flags, question_text, question_id);
        if (debate_cmd->parsed())
            return cmd_debate(flags, question_text, question_id, type_label);
        if (answer_cmd->parsed())
            return cmd_answer(flags, question_text, question_id, type_label);
        if (eval_cmd->parsed()) return cmd_eval(flags, dataset_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
