//! Prints the extracted pages and heading candidates of a PDF.

fn main() {
    let path = std::env::args().nth(1).expect("usage: dump_pdf <file.pdf>");
    let bytes = std::fs::read(&path).expect("read pdf");
    match paperwave_core::ingest::extract_text(&bytes) {
        Ok(doc) => {
            for (i, page) in doc.pages.iter().enumerate() {
                println!("--- page {} ({} chars)\n{page}", i + 1, page.chars().count());
            }
            for h in &doc.heading_candidates {
                println!("heading p{}: {}", h.page_index + 1, h.text);
            }
        }
        Err(err) => println!("error: {err}"),
    }
}
