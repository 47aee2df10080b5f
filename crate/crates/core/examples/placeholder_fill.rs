//! Fill a placeholder letter with a synthetic identity, and show what an
//! incomplete identity reports.

use seizure_freq::template::{fill_placeholders, placeholders, SyntheticIdentity};

fn main() {
    let letter = "Dear @GP_NAME@,\nRe: @PATIENT_NAME@, DOB @DOB@\n\
                  She reports two seizures a week.\nYours sincerely,\n@CLINICIAN@";
    println!("placeholders: {:?}\n", placeholders(letter));

    let mut id = SyntheticIdentity::new();
    for (k, v) in [
        ("GP_NAME", "Dr Imani Okafor"),
        ("PATIENT_NAME", "Rosa Lindqvist"),
        ("DOB", "03/02/1987"),
    ] {
        id.insert(k, v).unwrap();
    }
    match fill_placeholders(letter, &id) {
        Ok(s) => println!("{s}"),
        Err(e) => println!("incomplete identity: {e}\n"),
    }
    id.insert("CLINICIAN", "Dr Sam Achterberg").unwrap();
    println!("{}", fill_placeholders(letter, &id).unwrap());
}
