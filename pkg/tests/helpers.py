from emailauthor.corpus import RawEmail, clean_email, tokenize, CleanedEmail


def email(body: str, author: str = "someone", id: str = "e") -> CleanedEmail:
    """A CleanedEmail with exactly this body (no cleaning applied)."""
    return CleanedEmail(id=id, author=author, body=body, tokens=tuple(tokenize(body)))


def cleaned(body: str, author: str = "someone", id: str = "e") -> CleanedEmail:
    return clean_email(RawEmail(id=id, author=author, body=body))
