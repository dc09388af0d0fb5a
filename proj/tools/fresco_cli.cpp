// Batch front end: parse a fresco description, run the requested computation,
// emit a machine-readable report (JSON) or a transformed document.
//
// Exit codes: 0 ok, 2 parse/validation error, 3 insufficient precision
// (a larger truncation is suggested), 4 mathematical precondition failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fresco/fresco.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fresco::ValidationError("file", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit(const std::string& text, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(output_path);
    if (!out) throw fresco::ValidationError("output", "cannot write '" + output_path + "'");
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fresco: invariants of monogenic regular (a,b)-modules"};
    app.require_subcommand(1);

    std::string input_path, output_path;
    std::optional<int> truncation;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("file", input_path, "fresco description file")->required();
        cmd->add_option("--truncation", truncation, "working truncation order (overrides the document)");
        cmd->add_option("--output", output_path, "write the result to this path instead of stdout");
    };

    CLI::App* cmd_report = app.add_subcommand("report", "full invariant report");
    CLI::App* cmd_rank1 = app.add_subcommand("rank1", "report with the rank-1 normal-submodule families");
    CLI::App* cmd_beta = app.add_subcommand("beta", "report; fails with exit 4 when beta is outside its stratum");
    CLI::App* cmd_semisimple = app.add_subcommand("semisimple", "report focused on the stratification");
    CLI::App* cmd_dual = app.add_subcommand("dual", "twisted dual document, for pipelining");
    CLI::App* cmd_changevar = app.add_subcommand("changevar", "change-of-variable document, for pipelining");
    CLI::App* cmd_window = app.add_subcommand("window", "principal flag window document, for pipelining");

    std::string delta_str;
    cmd_dual->add_option("--delta", delta_str, "twist parameter, rational p/q")->required();
    std::string theta_str;
    cmd_changevar->add_option("--theta", theta_str, "comma-separated coefficients of a, a^2, ...")->required();
    int win_i = 0, win_j = 0;
    cmd_window->add_option("i", win_i, "window start (1-based)")->required();
    cmd_window->add_option("j", win_j, "window end (inclusive)")->required();

    for (CLI::App* c : {cmd_report, cmd_rank1, cmd_beta, cmd_semisimple, cmd_dual, cmd_changevar, cmd_window})
        add_common(c);

    CLI11_PARSE(app, argc, argv);

    try {
        fresco::FrescoDocument doc = fresco::parse_document(read_file(input_path));
        if (truncation) doc.truncation = *truncation;

        std::string out_text;
        if (cmd_report->parsed() || cmd_semisimple->parsed()) {
            fresco::ReportOptions opt;
            opt.subtheme = cmd_report->parsed();
            out_text = fresco::invariant_report(doc, opt).dump(2) + "\n";
        } else if (cmd_rank1->parsed()) {
            fresco::ReportOptions opt;
            opt.rank1_families = true;
            out_text = fresco::invariant_report(doc, opt).dump(2) + "\n";
        } else if (cmd_beta->parsed()) {
            fresco::Fresco f = fresco::document_to_fresco(doc);
            fresco::Rational b = fresco::beta(f); // PreconditionFailed maps to exit 4
            fresco::Json report = fresco::invariant_report(doc);
            report["beta"] = fresco::to_string(b);
            out_text = report.dump(2) + "\n";
        } else if (cmd_dual->parsed()) {
            fresco::Fresco f = fresco::document_to_fresco(doc);
            fresco::Fresco out = fresco::dual_twist(f, fresco::parse_rational(delta_str));
            out_text = fresco::serialize_document(fresco::fresco_to_document(out));
        } else if (cmd_changevar->parsed()) {
            fresco::Fresco f = fresco::document_to_fresco(doc);
            std::vector<fresco::Rational> coeffs;
            std::stringstream ss(theta_str);
            std::string tok;
            while (std::getline(ss, tok, ',')) coeffs.push_back(fresco::parse_rational(tok));
            fresco::Fresco out = fresco::change_variable(f, fresco::ChangeOfVariable(std::move(coeffs)));
            out_text = fresco::serialize_document(fresco::fresco_to_document(out));
        } else if (cmd_window->parsed()) {
            fresco::Fresco f = fresco::document_to_fresco(doc);
            fresco::Fresco out = fresco::window(f, win_i, win_j);
            out_text = fresco::serialize_document(fresco::fresco_to_document(out));
        }
        emit(out_text, output_path);
        return 0;
    } catch (const fresco::ValidationError& e) {
        std::cerr << "error: " << e.what() << " (field: " << e.field << ")\n";
        return 2;
    } catch (const fresco::InsufficientPrecision& e) {
        fresco::FrescoDocument doc;
        int used = truncation ? *truncation : 0;
        try {
            doc = fresco::parse_document(read_file(input_path));
            used = doc.truncation ? *doc.truncation : 0;
            if (truncation) used = *truncation;
            if (used == 0) {
                std::vector<fresco::Rational> lambda;
                for (const auto& l : doc.lambda) lambda.push_back(fresco::parse_rational(l));
                used = fresco::default_order(lambda);
            }
        } catch (...) {
        }
        int suggested = used + (e.needed - e.have + 1);
        std::cerr << "error: " << e.what() << "\n"
                  << "retry with --truncation " << suggested << " or larger\n";
        return 3;
    } catch (const fresco::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
