#include "rsbench/annotation.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace rsbench::catalog {

namespace {

// Accepted surface forms for each canonical term.
struct Forms {
    std::string_view canonical;
    std::array<std::string_view, 2> forms;
};

constexpr std::array<Forms, 8> kForms = {{
    {"mountains", {"mountain", "mountains"}},
    {"oceans", {"ocean", "oceans"}},
    {"lakes", {"lake", "lakes"}},
    {"rivers", {"river", "rivers"}},
    {"plains", {"plain", "plains"}},
    {"islands", {"island", "islands"}},
    {"ridges", {"ridge", "ridges"}},
    {"farmland", {"farmland", "farmlands"}},
}};

}  // namespace

bool AnnotationCheck::has(std::string_view term) const {
    return std::find(matched_terms.begin(), matched_terms.end(), term) != matched_terms.end();
}

AnnotationCheck validate_annotation(std::string_view text) {
    std::set<std::string> words;
    std::string word;
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else if (!word.empty()) {
            words.insert(std::move(word));
            word.clear();
        }
    }
    if (!word.empty()) words.insert(std::move(word));

    AnnotationCheck check;
    for (const auto& f : kForms) {
        const bool hit = std::any_of(f.forms.begin(), f.forms.end(),
                                     [&](std::string_view form) { return words.contains(std::string(form)); });
        if (hit) check.matched_terms.emplace_back(f.canonical);
    }
    check.valid = !check.matched_terms.empty();
    return check;
}

}  // namespace rsbench::catalog
