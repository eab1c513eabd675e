#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "austere/language.hpp"
#include "austere/mh.hpp"
#include "austere/rng.hpp"
#include "austere/subsampled.hpp"
#include "austere/trace.hpp"

namespace austere {

struct SampleRecord {
    std::string chain;
    std::size_t iteration = 0;
    std::string label;
    Value value;
    std::int64_t wall_nanos = 0;
    std::size_t consumed = 0;
    bool accepted = false;
};

struct TransitionRecord {
    std::size_t index = 0;
    std::string principal;
    TransitionResult result;
    bool subsampled = false;
};

// Something recorded after every kernel step: a predict label or a scope.
struct Watch {
    std::string label;
    std::string scope;  // empty: read `node` directly
    Value scope_label;
    NodeId node = kNoNode;
};

struct RunOptions {
    std::string chain = "0";
    bool record_transitions = false;
    std::vector<Watch> extra;  // recorded in addition to the trace's predicts
};

struct RunLog {
    std::vector<SampleRecord> samples;
    std::vector<TransitionRecord> transitions;
    SubsampledDiagnostics diagnostics;
    std::size_t steps = 0;
    std::int64_t kernel_nanos = 0;
};

// Executes one inference expression against the trace.  Samples of every
// predict label (and every extra watch) are appended after each step.
void run_infer(Trace& trace, const InferExpression& expr, Rng& rng, const RunOptions& options, RunLog& log);

// Evaluates a desugared program in order, running infer directives inline.
RunLog run_program(Trace& trace, const std::vector<Directive>& program, Rng& rng, const RunOptions& options);

void write_samples_csv(std::ostream& out, const std::vector<SampleRecord>& samples, bool timing = true);
void write_transitions_csv(std::ostream& out, const std::vector<TransitionRecord>& transitions, bool timing = true);
// JSON object keyed by label with mean, std and ess of the real-valued samples.
std::string summarize_json(const std::vector<SampleRecord>& samples);

}  // namespace austere
