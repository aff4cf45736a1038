#include "belle/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "belle/serialization.hpp"

namespace belle::cli {
namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

}  // namespace

Pipeline Pipeline::from_config(RunConfig cfg) {
    cfg.validate();
    Pipeline p;
    p.cfg_ = std::move(cfg);
    p.backend_ = make_backend(p.cfg_.backend);
    p.gateway_ = std::make_unique<llm::Gateway>(p.backend_);
    p.classifier_cfg_ = classify::ClassifierConfig::load(p.cfg_.classifier_config);
    p.templates_ = debate::PromptTemplates::load_dir(p.cfg_.templates_dir);
    p.cfg_.debate.operator_pool = debate::load_operator_pool(p.cfg_.operator_pool_path);
    p.demos_ = ops::Demos::load(p.cfg_.demos_path);
    if (!p.cfg_.index_path.empty() && std::filesystem::exists(p.cfg_.index_path)) {
        p.index_ = retrieval::RetrievalIndex::load(p.cfg_.index_path);
    } else if (!p.cfg_.corpus_path.empty()) {
        p.index_ = retrieval::RetrievalIndex::build(
            retrieval::load_corpus_jsonl(p.cfg_.corpus_path));
    }
    return p;
}

ops::OperatorEnv Pipeline::executor_env() const {
    ops::OperatorEnv env;
    env.gateway = gateway_.get();
    if (index_) env.retriever = ops::make_index_retriever(*index_);
    env.budget = cfg_.budget;
    env.demos = &demos_;
    env.tag_prefix = "executor";
    return env;
}

QuestionType Pipeline::classify_question(const Question& q, TokenUsage* usage) {
    return classify::classify(q, classifier_cfg_, *gateway_, usage);
}

std::pair<ExecutionPlan, Transcript> Pipeline::debate_question(const Question& q,
                                                               const QuestionType& type) {
    debate::DebateEngine engine(cfg_.debate, templates_, *gateway_);
    return engine.run(q, type);
}

Pipeline::AnswerResult Pipeline::answer(const Question& q) {
    AnswerResult result;
    if (q.declared_type) {
        result.type = *q.declared_type;
    } else {
        result.type = classify_question(q, &result.classifier_usage);
    }

    auto [plan, transcript] = debate_question(q, result.type);
    if (const auto violations = plan_validate(plan, cfg_.debate); !violations.empty())
        throw std::runtime_error("judge produced an invalid plan: " + violations.front());
    result.plan = std::move(plan);
    result.transcript = std::move(transcript);

    result.trace = exec::execute_plan(result.plan, q, result.type, executor_env());
    return result;
}

void Pipeline::persist(const Question& q, const AnswerResult& result,
                       const std::filesystem::path& run_dir) const {
    std::filesystem::create_directories(run_dir);

    nlohmann::ordered_json run;
    run["question"] = to_json(q);
    run["type"] = result.type.label;
    run["classifier_usage"] = to_json(result.classifier_usage);
    run["final_answer"] = result.trace.final_answer;
    write_text(run_dir / "run.json", run.dump(2) + "\n");

    std::ostringstream transcript;
    for (const auto& u : result.transcript.utterances) transcript << to_json(u).dump() << "\n";
    write_text(run_dir / "transcript.jsonl", transcript.str());

    write_text(run_dir / "plan.json", to_json(result.plan).dump(2) + "\n");
    write_text(run_dir / "trace.json", exec::trace_to_json(result.trace).dump(2) + "\n");
}

std::filesystem::path Pipeline::make_run_dir(const std::string& question_id) const {
    const auto now = std::chrono::system_clock::now();
    const auto time = std::chrono::system_clock::to_time_t(now);
    std::ostringstream stamp;
    stamp << std::put_time(std::localtime(&time), "%Y%m%d-%H%M%S");

    const std::filesystem::path base =
        std::filesystem::path(cfg_.out_dir) / (question_id + "-" + stamp.str());
    std::filesystem::path dir = base;
    for (int suffix = 2; std::filesystem::exists(dir); ++suffix)
        dir = base.string() + "-" + std::to_string(suffix);
    std::filesystem::create_directories(dir);
    return dir;
}

EvalOutcome run_eval(Pipeline& pipeline, const std::vector<Question>& dataset,
                     const std::filesystem::path& artifacts_dir) {
    std::vector<eval::PredictionRecord> predictions(dataset.size());
    std::atomic<std::size_t> next{0};

    const auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= dataset.size()) return;
            const Question& q = dataset[i];
            eval::PredictionRecord record;
            record.id = q.id;
            try {
                const auto result = pipeline.answer(q);
                record.answer = result.trace.final_answer;
                record.usage = result.classifier_usage;
                for (const auto& u : result.transcript.utterances) record.usage += u.usage;
                record.usage += result.trace.total_usage;
                if (!artifacts_dir.empty())
                    pipeline.persist(q, result, artifacts_dir / q.id);
            } catch (const std::exception& e) {
                record.failed = true;
                record.error = e.what();
            }
            predictions[i] = std::move(record);
        }
    };

    const int thread_count =
        std::min<int>(pipeline.config().concurrency, static_cast<int>(dataset.size()));
    std::vector<std::thread> threads;
    for (int i = 0; i < std::max(thread_count, 1); ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    EvalOutcome outcome;
    outcome.report = eval::evaluate_run(predictions, dataset,
                                        pipeline.config().compute_acc ? &pipeline.gateway()
                                                                      : nullptr);
    outcome.tokens = eval::token_report(pipeline.gateway().ledger(), outcome.report);
    return outcome;
}

}  // namespace belle::cli
