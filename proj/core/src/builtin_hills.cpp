#include "chai/activity.hpp"

namespace chai {
namespace {

// Explanation text reproduced with its original typography (curly quotes,
// en and em dashes).
constexpr const char* kHillsDefinition =
    "A Hill is a user-centered statements of intent that the entire team can rally around – so that everyone is pulling in the same direction. Hills describe something a specific user is enabled to do, not a specific implementation. They give teams the creative space they need to come to breakthrough ideas, without the need for detailed requirements. Write Hills at the beginning of a project or initiative, after you’ve identified the real needs of your users. Think of it as a team mission statement. The practice of Hills ensures that our entire team is aligned around doing what’s right for the user. They’re about keeping all of our teammates — across disciplines, oceans, and timezones — working in sync on the best experience for the user.\n"
    "\n"
    "A hill is a written statement that the team writes and agrees upon together. They’re fairly straightforward with three parts:\n"
    "\n"
    "The who is very clear and specific on the type of user that we are focusing on, so that could be a tech seller or a business analyst or an HR manager.\n"
    "\n"
    "The what is the second part. We’ve referred to these before as a user enablement. This is a specific task, or a specific thing that the user will be able to get done or will be able to accomplish. The what for a hill may talk about being able to deploy or being able to create something or be able to run some sort of analysis. So the what is a specific enablement that the user, mentioned in your who, is able to do.\n"
    "\n"
    "And last but not least, a hill includes a wow - who, what, wow. This is a specific market value or differentiating statement. It extends the what into that territory of absolute delight that we know that is required of all of our work with users these days. If you were to read your hill to a sponsor user, which you should, their reaction should be “YES. I want that. I need that. When can I have that?”\n"
    "\n"
    "So three parts to every hill: a who, a what and a wow.";

constexpr const char* kHillsExample =
    "Within selected product categories, requestors can find product matches for their search queries using natural, English-language conversation.";

}  // namespace

ActivityDefinition builtin_hills() {
    ActivityDefinition hills;
    hills.name = "Hills";
    hills.definition_text = kHillsDefinition;
    hills.examples = {kHillsExample};
    hills.example_label = "Example of a good Hill Statement";
    hills.criteria = {
        {"who", "Who", "Relevant people within the context we are designing within."},
        {"what", "What", "Enablements provided to the people in the Who section."},
        {"wow", "Wow", "The value differentiator or impact the solution provides."},
    };
    hills.steps = {
        {1, "Create the list “Who”", "who"},
        {2, "Create the list “What”", "what"},
        {3, "Create the list “Wow.”", "wow"},
        {4, "Diverge on many ideas for each section and quickly share them with your teammates. Build off of others’ ideas, but focus on quantity over quality and avoid drifting into features or talking about implementation details.", std::nullopt},
        {5, "Build your hill statement(s) using your ideas for “Who,” “What,” and “Wow.”", std::nullopt},
    };
    return hills;
}

}  // namespace chai
