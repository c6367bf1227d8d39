#pragma once

#include "chai/session.hpp"

#include <string>
#include <string_view>

namespace chai {

enum class ExportFormat { markdown, csv };

/// Accepts "md", "markdown" or "csv".
ExportFormat export_format_from_string(std::string_view name);
std::string_view to_string(ExportFormat format) noexcept;

struct ExportDocument {
    ExportFormat format = ExportFormat::markdown;
    std::string content;
};

/// Markdown: a pipe table with one column per criterion (short columns
/// padded with "~"), then Clusters and Hills sections when non-empty.
/// CSV (RFC 4180, CRLF): id,criterion,text,origin,status,cluster.
/// Rejected artifacts are left out of both.
ExportDocument export_session(const SessionState& state, ExportFormat format);

std::string export_markdown(const SessionState& state);
std::string export_csv(const SessionState& state);

}  // namespace chai
