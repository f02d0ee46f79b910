#pragma once

// Prompt texts embedded at build time from core/prompts/*.txt.
// The .txt files are the source of truth; edit those, not the
// generated translation unit.

namespace gpa::prompts {

extern const char* const kControlFlow;
extern const char* const kLcBase;
extern const char* const kLcCustom;
extern const char* const kEeBase;
extern const char* const kEeCustom;
extern const char* const kPqBase;
extern const char* const kPqCustom;
extern const char* const kPaBase;
extern const char* const kPaCustom;
extern const char* const kTsBase;
extern const char* const kTsCustom;
extern const char* const kTcBase;
extern const char* const kTcCustom;
extern const char* const kGfBase;

}  // namespace gpa::prompts
