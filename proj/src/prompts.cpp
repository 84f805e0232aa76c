#include "pgr/prompts.hpp"

#include <cctype>

#include "pgr/error.hpp"

namespace pgr {

std::string render_prompt(const PromptTemplate& t,
                          const std::map<std::string, std::string>& ctx) {
    std::string out;
    out.reserve(t.body.size());
    std::size_t i = 0;
    while (i < t.body.size()) {
        char c = t.body[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        std::size_t close = t.body.find('}', i + 1);
        if (close == std::string::npos) {
            out.push_back(c);
            ++i;
            continue;
        }
        std::string name = t.body.substr(i + 1, close - i - 1);
        bool ident = !name.empty();
        for (char nc : name)
            if (!std::isalnum(static_cast<unsigned char>(nc)) && nc != '_') ident = false;
        if (!ident) {  // not a placeholder, emit literally
            out.push_back(c);
            ++i;
            continue;
        }
        auto it = ctx.find(name);
        if (it == ctx.end())
            throw MissingPlaceholder("template '" + t.name + "': no binding for {" + name + "}");
        out += it->second;
        i = close + 1;
    }
    return out;
}

const PromptTemplate& describe_image_template() {
    static const PromptTemplate t{
        "describe_image_v1",
        "You are describing street-level frame {frame_id} for long-term place "
        "recognition.\n"
        "Write a detailed description of the scene covering, in order of importance:\n"
        "- visible text or signage (street names, business names, house numbers)\n"
        "- architectural characteristics of buildings (material, color, style, "
        "windows, roofs)\n"
        "- urban layout (intersections, straight roads, squares, sidewalks)\n"
        "- infrastructure elements (traffic lights, lampposts, fences, bridges)\n"
        "- natural features such as trees, hedges and other vegetation\n"
        "Exclude transient or variable elements: people, vehicles, lighting "
        "conditions, weather, shadows and seasonal indicators must not appear in "
        "the description.\n"
        "State the relative positions of objects explicitly, e.g. \"a tall brick "
        "building to the left of a narrow white house\".",
        PromptStage::describe_image};
    return t;
}

const PromptTemplate& parse_description_template() {
    static const PromptTemplate t{
        "parse_description_v1",
        "Convert the scene description below into a JSON scene graph with this "
        "exact schema:\n"
        "{\"nodes\": [{\"id\": \"n0\", \"label\": <object class>, "
        "\"attributes\": [<non-spatial properties>]}], "
        "\"edges\": [{\"source\": <node id>, \"target\": <node id>, "
        "\"relation\": <spatial relation>}]}\n"
        "Rules:\n"
        "- one node per distinct object; label is the object class "
        "(e.g. building, tree, traffic light)\n"
        "- attributes hold non-spatial properties only (e.g. classical, "
        "light-colored, arched windows)\n"
        "- spatial relationships (left of, right of, in front of, behind, next "
        "to, close by, on top of, beside) become directed edges\n"
        "- omit irrelevant or transient features: cars, people, weather, "
        "lighting, seasonal indicators\n"
        "- answer with the JSON document only\n"
        "Description:\n{description}",
        PromptStage::parse_description};
    return t;
}

}  // namespace pgr
