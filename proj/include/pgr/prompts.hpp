#pragma once

#include <map>
#include <string>

namespace pgr {

enum class PromptStage { describe_image, parse_description };

struct PromptTemplate {
    std::string name;
    std::string body;  // placeholders written as {name}
    PromptStage stage;
};

// Deterministic {placeholder} substitution. Throws MissingPlaceholder when a
// placeholder in the body has no binding in ctx.
std::string render_prompt(const PromptTemplate& t,
                          const std::map<std::string, std::string>& ctx);

// Versioned in-repo templates for the two service stages.
const PromptTemplate& describe_image_template();
const PromptTemplate& parse_description_template();

}  // namespace pgr
