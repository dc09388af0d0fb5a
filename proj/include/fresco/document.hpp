#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fresco/invariants.hpp"
#include "fresco/transforms.hpp"

namespace fresco {

using Json = nlohmann::ordered_json;

// Line-based fresco description:
//
//   rank 4
//   lambda 7/2 9/2 11/2 13/2
//   S1 0:1 4:1 6:1
//   S2 0:1
//   S3 0:1
//   truncation 28        (optional)
//
// '#' starts a comment; connection units are sparse exponent:coefficient maps
// and must spell out the constant term 0:1.
struct FrescoDocument {
    int rank = 0;
    std::vector<std::string> lambda;
    std::vector<std::map<int, std::string>> s;
    std::optional<int> truncation;
};

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline int parse_int(const std::string& s, const std::string& field) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(field, "expected an integer, got '" + s + "'");
    }
}

} // namespace detail

inline FrescoDocument parse_document(const std::string& text) {
    FrescoDocument doc;
    bool seen_rank = false, seen_lambda = false;
    std::vector<std::pair<int, std::map<int, std::string>>> s_lines;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::vector<std::string> tok = detail::tokenize(raw);
        if (tok.empty()) continue;
        const std::string& key = tok[0];
        const std::string where = key + " (line " + std::to_string(lineno) + ")";
        if (key == "rank") {
            if (seen_rank) throw ValidationError("rank", "duplicate rank line");
            if (tok.size() != 2) throw ValidationError("rank", "rank takes one integer");
            doc.rank = detail::parse_int(tok[1], "rank");
            seen_rank = true;
        } else if (key == "lambda") {
            if (seen_lambda) throw ValidationError("lambda", "duplicate lambda line");
            for (std::size_t i = 1; i < tok.size(); ++i) {
                parse_rational(tok[i]); // validate early
                doc.lambda.push_back(tok[i]);
            }
            seen_lambda = true;
        } else if (key == "truncation") {
            if (doc.truncation) throw ValidationError("truncation", "duplicate truncation line");
            if (tok.size() != 2) throw ValidationError("truncation", "truncation takes one integer");
            doc.truncation = detail::parse_int(tok[1], "truncation");
        } else if (key.size() > 1 && key[0] == 'S') {
            int j = detail::parse_int(key.substr(1), key);
            std::map<int, std::string> coeffs;
            for (std::size_t i = 1; i < tok.size(); ++i) {
                auto colon = tok[i].find(':');
                if (colon == std::string::npos)
                    throw ValidationError(where, "expected exponent:coefficient, got '" + tok[i] + "'");
                int e = detail::parse_int(tok[i].substr(0, colon), where);
                if (e < 0) throw ValidationError(where, "negative exponent " + std::to_string(e));
                std::string c = tok[i].substr(colon + 1);
                parse_rational(c);
                if (!coeffs.emplace(e, c).second)
                    throw ValidationError(where, "duplicate exponent " + std::to_string(e));
            }
            s_lines.emplace_back(j, std::move(coeffs));
        } else {
            throw ValidationError(where, "unknown directive '" + key + "'");
        }
    }
    if (!seen_rank) throw ValidationError("rank", "missing rank line");
    if (!seen_lambda) throw ValidationError("lambda", "missing lambda line");
    doc.s.resize(s_lines.size());
    std::vector<bool> seen(s_lines.size(), false);
    for (auto& [j, coeffs] : s_lines) {
        if (j < 1 || j > static_cast<int>(s_lines.size()))
            throw ValidationError("S" + std::to_string(j),
                                  "connection index out of range [1, " + std::to_string(s_lines.size()) + "]");
        if (seen[static_cast<std::size_t>(j - 1)])
            throw ValidationError("S" + std::to_string(j), "duplicate connection line");
        seen[static_cast<std::size_t>(j - 1)] = true;
        doc.s[static_cast<std::size_t>(j - 1)] = std::move(coeffs);
    }
    return doc;
}

inline std::string serialize_document(const FrescoDocument& doc) {
    std::ostringstream out;
    out << "rank " << doc.rank << "\n";
    out << "lambda";
    for (const auto& l : doc.lambda) out << " " << l;
    out << "\n";
    for (std::size_t j = 0; j < doc.s.size(); ++j) {
        out << "S" << (j + 1);
        for (const auto& [e, c] : doc.s[j]) out << " " << e << ":" << c;
        out << "\n";
    }
    if (doc.truncation) out << "truncation " << *doc.truncation << "\n";
    return out.str();
}

inline Fresco document_to_fresco(const FrescoDocument& doc) {
    if (doc.rank < 1) throw ValidationError("rank", "rank must be at least 1");
    if (static_cast<int>(doc.lambda.size()) != doc.rank)
        throw ValidationError("lambda", "expected " + std::to_string(doc.rank) + " invariants, got " +
                                            std::to_string(doc.lambda.size()));
    if (static_cast<int>(doc.s.size()) != doc.rank - 1)
        throw ValidationError("S", "expected " + std::to_string(doc.rank - 1) + " connection lines, got " +
                                       std::to_string(doc.s.size()));
    std::vector<Rational> lambda;
    for (std::size_t j = 0; j < doc.lambda.size(); ++j) {
        try {
            lambda.push_back(parse_rational(doc.lambda[j]));
        } catch (const ValidationError& e) {
            throw ValidationError("lambda[" + std::to_string(j + 1) + "]", e.what());
        }
    }
    const int order = doc.truncation ? *doc.truncation : default_order(lambda);
    if (order < 2) throw ValidationError("truncation", "truncation must be at least 2");
    std::vector<PowerSeries> s;
    for (std::size_t j = 0; j < doc.s.size(); ++j) {
        const std::string field = "S" + std::to_string(j + 1);
        std::map<int, Rational> coeffs;
        for (const auto& [e, c] : doc.s[j]) {
            if (e >= order)
                throw ValidationError(field, "exponent " + std::to_string(e) + " is not below the truncation " +
                                                 std::to_string(order));
            coeffs[e] = parse_rational(c);
        }
        s.emplace_back(std::move(coeffs), order);
    }
    return Fresco(std::move(lambda), std::move(s), order);
}

inline FrescoDocument fresco_to_document(const Fresco& f) {
    FrescoDocument doc;
    doc.rank = f.rank();
    for (int j = 1; j <= f.rank(); ++j) doc.lambda.push_back(to_string(f.lambda(j)));
    for (int j = 1; j < f.rank(); ++j) {
        std::map<int, std::string> coeffs;
        for (const auto& [e, c] : f.connection(j).terms()) coeffs[e] = to_string(c);
        doc.s.push_back(std::move(coeffs));
    }
    doc.truncation = f.order();
    return doc;
}

namespace detail {

inline Json series_json(const PowerSeries& s) {
    Json out = Json::object();
    for (const auto& [e, c] : s.terms()) out[std::to_string(e)] = to_string(c);
    return out;
}

inline Json element_json(const Element& x) {
    Json out = Json::array();
    for (const auto& u : x.u) out.push_back(series_json(u));
    return out;
}

} // namespace detail

struct ReportOptions {
    bool rank1_families = false;
    bool subtheme = false;
};

// Deterministic invariant report; rationals render as exact strings.
inline Json invariant_report(const FrescoDocument& doc, const ReportOptions& opt = {}) {
    Fresco f = document_to_fresco(doc);
    const int k = f.rank();

    Json report;
    {
        Json input;
        input["rank"] = doc.rank;
        Json ls = Json::array();
        for (const auto& l : doc.lambda) ls.push_back(to_string(parse_rational(l)));
        input["lambda"] = ls;
        Json ss = Json::array();
        for (int j = 1; j < k; ++j) ss.push_back(detail::series_json(f.connection(j)));
        input["S"] = ss;
        input["truncation"] = f.order();
        report["input"] = std::move(input);
    }
    {
        Json inv;
        Json ls = Json::array();
        for (int j = 1; j <= k; ++j) ls.push_back(to_string(f.lambda(j)));
        inv["lambda"] = ls;
        Json ps = Json::array();
        for (int j = 1; j < k; ++j) ps.push_back(to_string(f.p(j)));
        inv["p"] = ps;
        try {
            inv["p_total"] = to_string(p_total(f));
        } catch (const PreconditionFailed&) {
            inv["p_total"] = nullptr;
        }
        inv["mu"] = to_string(mu(f));
        Json roots = Json::array();
        for (const auto& r : bernstein_roots(f)) roots.push_back(to_string(r));
        inv["bernstein_roots"] = roots;
        Json blocks = Json::array();
        for (const auto& blk : primitive_blocks(f)) {
            Json b;
            b["class"] = to_string(blk.cls.representative);
            b["first"] = blk.first;
            b["last"] = blk.last;
            blocks.push_back(std::move(b));
        }
        inv["primitive_blocks"] = blocks;
        report["invariants"] = std::move(inv);
    }
    {
        Json alphas = Json::array();
        for (int j = 1; j < k; ++j) alphas.push_back(to_string(alpha_j(f, j)));
        report["alpha"] = alphas;
    }
    try {
        report["beta"] = to_string(beta(f));
    } catch (const PreconditionFailed& e) {
        report["beta"] = nullptr;
        report["beta_note"] = e.what();
    }
    {
        StratumReport sr = stratum_level(f);
        Json st;
        st["level"] = sr.level;
        st["rank"] = k;
        st["semisimple"] = (sr.level == k);
        Json windows = Json::array();
        for (const auto& wb : sr.failing) {
            Json w;
            w["i"] = wb.i;
            w["j"] = wb.j;
            w["beta"] = to_string(wb.beta);
            windows.push_back(std::move(w));
        }
        st["windows"] = windows;
        report["stratum"] = std::move(st);
    }
    if (opt.subtheme) {
        try {
            Rank2Class c = rank2_subtheme_class(f);
            Json sub;
            sub["lambda1"] = to_string(c.lambda1);
            sub["lambda2"] = to_string(c.lambda2);
            sub["p"] = to_string(c.p);
            sub["alpha"] = to_string(c.alpha);
            report["subtheme"] = std::move(sub);
        } catch (const BetaVanishes& e) {
            report["subtheme"] = nullptr;
            report["subtheme_note"] = e.what();
        } catch (const PreconditionFailed& e) {
            report["subtheme"] = nullptr;
            report["subtheme_note"] = e.what();
        }
    }
    if (opt.rank1_families) {
        Json fams = Json::array();
        for (const auto& fam : rank1_normal_submodules(f)) {
            Json fj;
            fj["mu"] = to_string(fam.mu);
            fj["generator"] = detail::element_json(fam.generator);
            Json dirs = Json::array();
            for (const auto& d : fam.directions) dirs.push_back(detail::element_json(d));
            fj["directions"] = dirs;
            fams.push_back(std::move(fj));
        }
        report["rank1_families"] = fams;
    }
    return report;
}

} // namespace fresco
