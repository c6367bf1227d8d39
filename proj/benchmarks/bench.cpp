#include "chai/agent.hpp"
#include "chai/parser.hpp"
#include "chai/prompt.hpp"
#include "chai/serialization.hpp"
#include "chai/session.hpp"

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

using namespace chai;

namespace {

const std::string kContext =
    "RetailInc wants a new inventory management system that predicts demand and keeps shelves stocked.";

std::string numbered_reply(int items) {
    std::string out = "Here are some ideas:\n\n";
    for (int i = 1; i <= items; ++i) out += std::to_string(i) + ". Idea number " + std::to_string(i) + "\n";
    return out + "\nNote: These are just some ideas.";
}

Session scripted_session(int steps) {
    auto activity = builtin_hills();
    auto s = Session::start(activity, SessionContext::from_text(kContext), Mode::stepwise);
    for (int step = 1; step <= steps; ++step) {
        if (step > 1) s.advance();
        s.apply_agent_response(numbered_reply(10));
    }
    return s;
}

}  // namespace

static void BM_ComposePrompt(benchmark::State& state) {
    auto activity = builtin_hills();
    auto context = SessionContext::from_text(kContext);
    auto directive = make_step_directive(activity, 1);
    for (auto _ : state) benchmark::DoNotOptimize(compose_initial_prompt(activity, context, directive));
}
BENCHMARK(BM_ComposePrompt);

static void BM_ParseStepResponse(benchmark::State& state) {
    auto reply = numbered_reply(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(parse_step_response(reply, "who"));
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * reply.size()));
}
BENCHMARK(BM_ParseStepResponse)->Arg(10)->Arg(100)->Arg(1000);

static void BM_Replay(benchmark::State& state) {
    auto s = scripted_session(3);
    for (int i = 0; i < state.range(0); ++i) s.submit_human_artifact("who", "Human idea " + std::to_string(i), "Ana");
    const auto& events = s.events();
    for (auto _ : state) benchmark::DoNotOptimize(replay(events));
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * events.size()));
}
BENCHMARK(BM_Replay)->Arg(0)->Arg(100)->Arg(1000);

static void BM_ParseEventLog(benchmark::State& state) {
    auto s = scripted_session(3);
    std::string log;
    for (const auto& e : s.events()) log += encode_event_line(e);
    for (auto _ : state) benchmark::DoNotOptimize(parse_event_log(log));
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * log.size()));
}
BENCHMARK(BM_ParseEventLog);
BENCHMARK_MAIN();
