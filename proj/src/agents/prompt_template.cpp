#include <algorithm>
#include <fstream>

#include "socratic/agents.hpp"
#include "socratic/errors.hpp"
#include "socratic/serialization.hpp"
#include "socratic/text.hpp"

namespace socratic::agents {

namespace {

using Node = PromptTemplate::Node;
using Nodes = PromptTemplate::Nodes;

constexpr std::string_view kSystemHeader = "=== system ===";
constexpr std::string_view kUserHeader = "=== user ===";

struct Section {
    bool is_system = false;
    std::string body;
};

std::vector<Section> split_sections(std::string_view source) {
    std::vector<Section> sections;
    std::size_t pos = 0;
    while (pos <= source.size()) {
        const auto eol = source.find('\n', pos);
        const auto line = source.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        const auto stripped = text::trim(line);
        if (stripped == kSystemHeader || stripped == kUserHeader) {
            sections.push_back({stripped == kSystemHeader, {}});
        } else if (!sections.empty()) {
            sections.back().body.append(line);
            if (eol != std::string_view::npos) sections.back().body.push_back('\n');
        } else if (!stripped.empty()) {
            throw TemplateError("text before the first section header: '" + std::string(stripped) + "'");
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return sections;
}

bool is_blank(std::string_view s) { return text::trim(s).empty(); }

/// Recursive-descent parse of one section body.
class BodyParser {
public:
    BodyParser(std::string_view body, const std::vector<std::string>& allowed, bool materials_allowed)
        : body_(body), allowed_(allowed), materials_allowed_(materials_allowed) {}

    Nodes parse() {
        Nodes nodes = parse_until({});
        if (pos_ < body_.size()) throw TemplateError("unexpected text after template body");
        return nodes;
    }

private:
    // `open` is the enclosing block name, empty at top level.
    Nodes parse_until(const std::string& open) {
        Nodes nodes;
        while (pos_ < body_.size()) {
            const auto tag_start = body_.find("{{", pos_);
            if (tag_start == std::string_view::npos) {
                push_text(nodes, body_.substr(pos_));
                pos_ = body_.size();
                break;
            }
            const auto tag_end = body_.find("}}", tag_start + 2);
            if (tag_end == std::string_view::npos) throw TemplateError("unterminated '{{' in template");

            const std::string tag(text::trim(body_.substr(tag_start + 2, tag_end - tag_start - 2)));
            if (tag.empty()) throw TemplateError("empty placeholder '{{}}'");
            const char sigil = tag.front();
            const bool is_block_tag = sigil == '#' || sigil == '^' || sigil == '/';

            // A block tag alone on its line swallows that line.
            std::size_t text_end = tag_start;
            std::size_t resume = tag_end + 2;
            if (is_block_tag) {
                const auto line_start = body_.rfind('\n', tag_start == 0 ? 0 : tag_start - 1);
                const std::size_t ls = (line_start == std::string_view::npos || tag_start == 0) ? 0 : line_start + 1;
                const auto line_end = body_.find('\n', resume);
                const std::size_t le = line_end == std::string_view::npos ? body_.size() : line_end;
                if (is_blank(body_.substr(ls, tag_start - ls)) && is_blank(body_.substr(resume, le - resume))) {
                    text_end = std::max(ls, pos_);
                    resume = line_end == std::string_view::npos ? body_.size() : line_end + 1;
                }
            }
            push_text(nodes, body_.substr(pos_, text_end - pos_));
            pos_ = resume;

            if (sigil == '/') {
                const std::string name = tag.substr(1);
                if (name != open) {
                    throw TemplateError("closing '{{/" + name + "}}' does not match " +
                                        (open.empty() ? std::string("any open block") : "'{{#" + open + "}}'"));
                }
                return nodes;
            }
            if (is_block_tag) {
                const std::string name = tag.substr(1);
                check_name(name);
                Node block{sigil == '#' ? Node::Kind::Block : Node::Kind::InvertedBlock, name, {}};
                block.children = parse_until(name);
                nodes.push_back(std::move(block));
                continue;
            }
            check_name(tag);
            if (tag == "materials" && !materials_allowed_) {
                throw TemplateError("{{materials}} may only appear in the first user turn");
            }
            nodes.push_back(Node{Node::Kind::Value, tag, {}});
        }
        if (!open.empty()) throw TemplateError("block '" + open + "' is never closed");
        return nodes;
    }

    void push_text(Nodes& nodes, std::string_view s) {
        if (!s.empty()) nodes.push_back(Node{Node::Kind::Text, std::string(s), {}});
    }

    void check_name(const std::string& name) const {
        if (std::find(allowed_.begin(), allowed_.end(), name) == allowed_.end()) {
            throw TemplateError("unknown placeholder '{{" + name + "}}'");
        }
    }

    std::string_view body_;
    const std::vector<std::string>& allowed_;
    bool materials_allowed_;
    std::size_t pos_ = 0;
};

void render_nodes(const Nodes& nodes, const PromptTemplate::Values& values, std::string& out) {
    for (const auto& node : nodes) {
        const auto it = node.kind == Node::Kind::Text ? values.end() : values.find(node.text);
        const bool present = it != values.end() && it->second.has_value() && !it->second->empty();
        switch (node.kind) {
            case Node::Kind::Text: out += node.text; break;
            case Node::Kind::Value:
                if (present) out += *it->second;
                break;
            case Node::Kind::Block:
                if (present) render_nodes(node.children, values, out);
                break;
            case Node::Kind::InvertedBlock:
                if (!present) render_nodes(node.children, values, out);
                break;
        }
    }
}

std::string tidy(const std::string& s) { return std::string(text::trim(s)); }

}  // namespace

const std::vector<std::string>& allowed_placeholders(PromptRole role) {
    static const std::vector<std::string> student_initial{"topic",     "concepts",    "level",
                                                          "materials", "constraints", "prior_question"};
    static const std::vector<std::string> student_revision{"topic",     "concepts",    "level",    "materials",
                                                           "question",  "rationale",   "feedback", "constraints",
                                                           "prior_question"};
    static const std::vector<std::string> educator{"topic",    "concepts",  "level",       "materials",
                                                   "question", "rationale", "constraints", "prior_question"};
    static const std::vector<std::string> judge{"topic", "concepts", "question_1", "question_2",
                                                "criterion_guidance"};
    switch (role) {
        case PromptRole::StudentInitial: return student_initial;
        case PromptRole::StudentRevision: return student_revision;
        case PromptRole::Educator: return educator;
        case PromptRole::Judge: return judge;
    }
    return judge;
}

PromptTemplate PromptTemplate::parse(std::string_view source, PromptRole role) {
    const auto sections = split_sections(source);
    if (sections.empty() || !sections.front().is_system) {
        throw TemplateError("template must start with a '=== system ===' section");
    }
    PromptTemplate tmpl;
    const auto& allowed = allowed_placeholders(role);
    for (std::size_t i = 0; i < sections.size(); ++i) {
        if (i > 0 && sections[i].is_system) throw TemplateError("only one system section is allowed");
        const bool first_user = i == 1;
        BodyParser parser(sections[i].body, allowed, first_user);
        if (i == 0) {
            tmpl.system_ = parser.parse();
        } else {
            tmpl.user_.push_back(parser.parse());
        }
    }
    return tmpl;
}

PromptTemplate::Rendered PromptTemplate::render(const Values& values) const {
    Rendered rendered;
    render_nodes(system_, values, rendered.system);
    rendered.system = tidy(rendered.system);
    for (const auto& turn : user_) {
        std::string body;
        render_nodes(turn, values, body);
        body = tidy(body);
        if (!body.empty()) rendered.user_turns.push_back(std::move(body));
    }
    return rendered;
}

// ---------------------------------------------------------------------------

std::string_view TemplateSet::file_name(PromptRole role) {
    switch (role) {
        case PromptRole::StudentInitial: return "student_initial.tmpl";
        case PromptRole::StudentRevision: return "student_revision.tmpl";
        case PromptRole::Educator: return "educator.tmpl";
        case PromptRole::Judge: return "judge.tmpl";
    }
    return {};
}

namespace {
constexpr PromptRole kRoles[] = {PromptRole::StudentInitial, PromptRole::StudentRevision, PromptRole::Educator,
                                 PromptRole::Judge};
}

TemplateSet TemplateSet::defaults() {
    TemplateSet set;
    for (auto role : kRoles) set.templates_.emplace(role, PromptTemplate::parse(default_source(role), role));
    return set;
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw TemplateError("template directory not found: " + dir.string());
    TemplateSet set;
    for (auto role : kRoles) {
        const auto path = dir / file_name(role);
        try {
            if (std::filesystem::exists(path)) {
                set.templates_.emplace(role, PromptTemplate::parse(read_file(path), role));
            } else {
                set.templates_.emplace(role, PromptTemplate::parse(default_source(role), role));
            }
        } catch (const TemplateError& e) {
            throw TemplateError(path.string() + ": " + e.what());
        }
    }
    return set;
}

const PromptTemplate& TemplateSet::get(PromptRole role) const { return templates_.at(role); }

const TemplateSet& default_templates() {
    static const TemplateSet set = TemplateSet::defaults();
    return set;
}

}  // namespace socratic::agents
