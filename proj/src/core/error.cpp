#include "groundchat/error.hpp"

namespace groundchat {

std::string_view code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::invalid_config: return "invalid_config";
        case ErrorCode::invalid_url: return "invalid_url";
        case ErrorCode::fetch_status: return "fetch_status";
        case ErrorCode::fetch_timeout: return "fetch_timeout";
        case ErrorCode::fetch_too_large: return "fetch_too_large";
        case ErrorCode::fetch_too_many_redirects: return "fetch_too_many_redirects";
        case ErrorCode::fetch_failed: return "fetch_failed";
        case ErrorCode::empty_document: return "empty_document";
        case ErrorCode::html_parse: return "html_parse";
        case ErrorCode::pdf_parse: return "pdf_parse";
        case ErrorCode::no_text_layer: return "no_text_layer";
        case ErrorCode::empty_after_extraction: return "empty_after_extraction";
        case ErrorCode::empty_upload: return "empty_upload";
        case ErrorCode::upload_too_large: return "upload_too_large";
        case ErrorCode::unsplittable: return "unsplittable";
        case ErrorCode::unknown_source: return "unknown_source";
        case ErrorCode::empty_system_message: return "empty_system_message";
        case ErrorCode::unresolved_placeholder: return "unresolved_placeholder";
        case ErrorCode::bundle_too_large: return "bundle_too_large";
        case ErrorCode::backend_unreachable: return "backend_unreachable";
        case ErrorCode::backend_status: return "backend_status";
        case ErrorCode::backend_timeout: return "backend_timeout";
        case ErrorCode::backend_bad_response: return "backend_bad_response";
        case ErrorCode::no_sources: return "no_sources";
        case ErrorCode::busy: return "busy";
        case ErrorCode::empty_question: return "empty_question";
        case ErrorCode::question_too_long: return "question_too_long";
        case ErrorCode::unknown_session: return "unknown_session";
        case ErrorCode::unknown_level: return "unknown_level";
        case ErrorCode::unknown_questionnaire: return "unknown_questionnaire";
        case ErrorCode::unknown_item: return "unknown_item";
        case ErrorCode::out_of_range: return "out_of_range";
        case ErrorCode::duplicate_submission: return "duplicate_submission";
        case ErrorCode::bad_window: return "bad_window";
        case ErrorCode::weak_passphrase: return "weak_passphrase";
        case ErrorCode::outside_window: return "outside_window";
        case ErrorCode::bad_passphrase: return "bad_passphrase";
        case ErrorCode::forbidden: return "forbidden";
        case ErrorCode::bad_request: return "bad_request";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::internal: return "internal";
    }
    return "internal";
}

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::unknown_session:
        case ErrorCode::unknown_source:
        case ErrorCode::unknown_questionnaire:
        case ErrorCode::not_found:
            return 404;
        case ErrorCode::no_sources:
        case ErrorCode::busy:
        case ErrorCode::duplicate_submission:
        case ErrorCode::bundle_too_large:
            return 409;
        case ErrorCode::outside_window:
        case ErrorCode::bad_passphrase:
        case ErrorCode::forbidden:
            return 403;
        case ErrorCode::fetch_too_large:
        case ErrorCode::upload_too_large:
            return 413;
        case ErrorCode::pdf_parse:
        case ErrorCode::no_text_layer:
        case ErrorCode::html_parse:
        case ErrorCode::empty_after_extraction:
        case ErrorCode::empty_document:
        case ErrorCode::unsplittable:
            return 422;
        case ErrorCode::fetch_status:
        case ErrorCode::fetch_timeout:
        case ErrorCode::fetch_too_many_redirects:
        case ErrorCode::fetch_failed:
        case ErrorCode::backend_status:
        case ErrorCode::backend_bad_response:
            return 502;
        case ErrorCode::backend_unreachable:
            return 503;
        case ErrorCode::backend_timeout:
            return 504;
        case ErrorCode::internal:
        case ErrorCode::invalid_config:
            return 500;
        default:
            return 400;
    }
}

}  // namespace groundchat
