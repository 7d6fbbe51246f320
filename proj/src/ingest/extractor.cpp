#include "groundchat/chunker.hpp"
#include "groundchat/error.hpp"
#include "groundchat/ingest.hpp"
#include "groundchat/utf8.hpp"

namespace groundchat::ingest {

ExtractedDocument Extractor::extract(const SourceRef& source, const RawDocument& raw) {
    if (raw.bytes.empty()) throw Error(ErrorCode::empty_document, "source " + source.locator + " has no content");

    std::string text;
    switch (raw.media) {
        case Media::html:
            text = extract_html(raw.bytes, options_.strip_elements);
            break;
        case Media::pdf:
            text = extract_pdf(raw.bytes);
            break;
        case Media::plain:
            text = raw.bytes;
            break;
    }

    ExtractedDocument doc;
    doc.source_id = source.id;
    doc.normalized_text = normalize(text);
    if (doc.normalized_text.empty()) {
        throw Error(ErrorCode::empty_after_extraction, "no readable text left in " + source.locator);
    }
    doc.char_count = utf8::length(doc.normalized_text);
    doc.token_estimate = chunker::estimate_tokens(doc.normalized_text);
    doc.extracted_at = clock_->now();
    count_.fetch_add(1);
    return doc;
}

}  // namespace groundchat::ingest
