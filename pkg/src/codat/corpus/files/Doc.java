public class Doc {

    //OVERVIEW: A document contains a title and a text body. Doc
    //   is immutable and provides an iterator.
    //   A document is constructed from a single string, (which is e.g., the entire
    //   contents of a text file). We make the convention that the first
    //   line of the string (i.e. up to \n) is the title, and the remaining lines are the body,
    //   with whitespace replaced by a single blank.

    String title;    //title of the document
    String body;     //body of the document


    //CONSTRUCTORS

    public Doc(String s) throws NotPossibleException {
        //EFFECTS: if s cannot be processed as a document throws NotPossibleException,
        //   else makes this be the Doc corresponding to s.

        Scanner input = new Scanner(s);

        title = input.nextLine();          //title is first line.

        body = "";             //body is remainder. Replace all whitespace by single blank.
        while (input.hasNext())
            body = body + input.next() + " ";
    }


    //METHODS

    public String getTitle() {
        //EFFECTS: Returns the title of this.
        return(title);
    }


    public String getBody() {
        //EFFECTS: Returns the body of this.
        return(body);
    }



    //ITERATOR

    public Iterator words() {
        //EFFECTS: Returns a generator that will yield all the words in the document
        //as strings in the order they appear in the text.

        return new WordGenerator(this);
    }


    // inner class
    private static class WordGenerator implements Iterator {

        private Doc doc; // the Doc
        Scanner inpt;    //Scanner used to iterate over the body of doc

        WordGenerator(Doc idoc) { //the constructor of the generator
            // REQUIRES: idoc != null

            doc = idoc; //set to the Doc being iterated over,
            //which is passed to the Iterator as "this" in
            //the call to the Iterator.
            //The iterator then passes it on to the generator.

            inpt = new Scanner(doc.body);

        }

        public boolean hasNext( ) {
            //If the inpt scanner still has input, then return true
            return(inpt.hasNext());
        }

        public Object next( ) throws NoSuchElementException {
            //If inpt scanner still has input, then return the next token as a string,
            //otherwise throw exception. Note that we need a wrapper
            //class (String) since the return type of next is Object.

            if ( inpt.hasNext() ) {
                return( inpt.next());
            } else {
                throw new NoSuchElementException("Doc.words");
            }

        }

        public void remove( ) { return; }//WARNING: DOESNT DO ANYTHING, i.e is a stub

    }

}
