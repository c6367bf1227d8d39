#include "chai/export.hpp"

#include "chai/error.hpp"

#include <algorithm>

namespace chai {
namespace {

constexpr std::string_view kPadCell = "~";

std::string markdown_cell(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '|') {
            out += "\\|";
        } else if (c == '\n' || c == '\r') {
            out += ' ';
        } else {
            out += c;
        }
    }
    return out;
}

std::string csv_field(std::string_view s) {
    bool quote = s.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!quote) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string origin_label(const Artifact& a) {
    return a.origin == Origin::agent ? "agent" : "human:" + a.author;
}

std::string text_of(const SessionState& state, const std::string& id) {
    const auto* a = state.find_artifact(id);
    return a ? a->text : id;
}

std::string join_texts(const SessionState& state, const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += "; ";
        out += text_of(state, id);
    }
    return out;
}

}  // namespace

ExportFormat export_format_from_string(std::string_view name) {
    if (name == "md" || name == "markdown") return ExportFormat::markdown;
    if (name == "csv") return ExportFormat::csv;
    throw Error(ErrorKind::validation, "format: unknown export format \"" + std::string(name) + "\"");
}

std::string_view to_string(ExportFormat format) noexcept { return format == ExportFormat::csv ? "csv" : "md"; }

ExportDocument export_session(const SessionState& state, ExportFormat format) {
    return {format, format == ExportFormat::csv ? export_csv(state) : export_markdown(state)};
}

std::string export_markdown(const SessionState& state) {
    const auto& criteria = state.activity.criteria;
    std::string out;
    if (!criteria.empty()) {
        std::vector<std::vector<std::string>> columns(criteria.size());
        for (const auto& a : state.board) {
            if (a.status == ArtifactStatus::rejected) continue;
            for (std::size_t c = 0; c < criteria.size(); ++c) {
                if (criteria[c].key == a.criterion_key) columns[c].push_back(markdown_cell(a.text));
            }
        }
        std::size_t rows = 0;
        for (const auto& col : columns) rows = std::max(rows, col.size());

        out += "|";
        for (const auto& c : criteria) out += " " + markdown_cell(c.label) + " |";
        out += "\n|";
        for (std::size_t c = 0; c < criteria.size(); ++c) out += " --- |";
        out += "\n";
        for (std::size_t r = 0; r < rows; ++r) {
            out += "|";
            for (const auto& col : columns) {
                out += " " + (r < col.size() ? col[r] : std::string(kPadCell)) + " |";
            }
            out += "\n";
        }
    }

    if (!state.clusters.empty()) {
        out += "\n## Clusters\n";
        for (const auto& cluster : state.clusters) {
            out += "\n### " + cluster.label + "\n\n";
            if (cluster.member_ids.empty()) out += "_(empty)_\n";
            for (const auto& id : cluster.member_ids) {
                const auto* a = state.find_artifact(id);
                if (!a) continue;
                out += "- " + a->text + " (" + a->criterion_key + ")\n";
            }
        }
    }

    if (!state.hills.empty()) {
        out += "\n## Hills\n\n";
        std::size_t n = 0;
        for (const auto& hill : state.hills) {
            out += std::to_string(++n) + ". " + hill.text + "\n";
            out += "   - Who: " + join_texts(state, hill.who_refs) + "\n";
            out += "   - What: " + join_texts(state, hill.what_refs) + "\n";
            out += "   - Wow: " + join_texts(state, hill.wow_refs) + "\n";
        }
    }
    return out;
}

std::string export_csv(const SessionState& state) {
    std::string out = "id,criterion,text,origin,status,cluster\r\n";
    for (const auto& a : state.board) {
        if (a.status == ArtifactStatus::rejected) continue;
        std::string cluster;
        if (a.cluster_id) {
            const auto* c = state.find_cluster(*a.cluster_id);
            cluster = c ? c->label : *a.cluster_id;
        }
        out += csv_field(a.id) + "," + csv_field(a.criterion_key) + "," + csv_field(a.text) + "," +
               csv_field(origin_label(a)) + "," + csv_field(to_string(a.status)) + "," + csv_field(cluster) + "\r\n";
    }
    return out;
}

}  // namespace chai
