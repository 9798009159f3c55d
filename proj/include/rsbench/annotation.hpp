#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace rsbench::catalog {

/// Landform vocabulary that annotations are written against, in canonical
/// (plural) form.
inline constexpr std::array<std::string_view, 8> kVocabulary = {
    "mountains", "oceans", "lakes", "rivers", "plains", "islands", "ridges", "farmland",
};

struct AnnotationCheck {
    /// Canonical terms found, in vocabulary order, without duplicates.
    std::vector<std::string> matched_terms;
    bool valid = false;

    bool has(std::string_view term) const;
};

/// Case-insensitive whole-word match of singular or plural vocabulary forms.
/// Valid iff at least one term matches.
AnnotationCheck validate_annotation(std::string_view text);

}  // namespace rsbench::catalog
