#pragma once

#include "rcafuse/ingest.hpp"
#include "rcafuse/llm_gateway.hpp"

#include <optional>
#include <string>

namespace rcafuse {

struct ModalityFlags {
    bool use_log = true;
    bool use_trace = true;
    bool use_metric = true;

    bool any() const { return use_log || use_trace || use_metric; }
    std::string name() const;  // "log+trace+metric", "log", ...
};

// Final structured verdict for one fault case.
struct RcaResult {
    std::string uuid;
    std::string component;
    std::string reason;
    std::string reasoning_trace;
};

struct Verdict {
    std::string component;
    std::string reason;
    std::string reasoning_trace;
};

// Builds the cross-modal prompt from the template ({LOG_SECTION} etc.);
// disabled modalities are omitted entirely. Throws
// Error{AllModalitiesDisabled} when no flag is set.
std::string assemble_prompt(const std::string& log_report, const std::string& trace_report,
                            const std::string& metric_summary, const ModalityFlags& flags,
                            const std::string& template_text);

// Scans for the first balanced JSON object holding non-empty "component",
// "reason" and "reasoning_trace" strings; tolerates fences, surrounding
// prose and one missing final closing brace. nullopt when nothing extracts.
std::optional<Verdict> extract_structured(const std::string& llm_text);

struct AnalyzeStats {
    int llm_calls = 0;
    std::string last_raw;
};

// One LLM round plus up to three format-correction retries; never throws on
// extraction failure: the result degrades to component "unknown" carrying
// the last raw text.
RcaResult analyze_case(const FaultCase& c, const std::string& log_report,
                       const std::string& trace_report, const std::string& metric_summary,
                       const ModalityFlags& flags, const std::string& template_text, LlmGateway& gateway,
                       AnalyzeStats* stats = nullptr);

}  // namespace rcafuse
